//! Boundary-divisor combinatorics of the built-in example surfaces.
//!
//! A surface here is an equivariant compactification `X` of the `ax+b`
//! group `G`, recorded purely through its boundary divisors `D_j`.  For
//! each divisor we store four integers/rationals that control everything
//! downstream:
//!
//! * `ord_a` — the order of vanishing of the coordinate `a` along `D_j`,
//! * `ord_b_max` — the largest order of vanishing of any translate `b - c`,
//! * `best_translate` — the translate `c` achieving that maximum (a single
//!   rational, or all of `Q` when the maximum is attained by every `c`),
//! * `anticanonical_mult` — the multiplicity of `D_j` in `-div(omega)` for
//!   the right-invariant top form `omega = db da / a`.
//!
//! Three models are built in: the split quadric `P^1 x P^1`, the minimal
//! desingularization of the split `A3+A1` quartic del Pezzo surface (kept as
//! combinatorial data only), and the family of blown-up projective planes
//! coming from orbit closures of degree-`n` polynomials.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::arith::{factorize, parse_rat};
use crate::{Error, Int, Rat, Result};

/// The translate `c` maximizing `ord_{D_j}(b - c)`.
///
/// By the argmax computation this is either a single rational or all of `Q`;
/// the latter happens exactly when the maximal order is `<= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Translate {
    AllOfQ,
    Value(Rat),
}

impl Translate {
    pub fn as_value(&self) -> Option<&Rat> {
        match self {
            Translate::AllOfQ => None,
            Translate::Value(c) => Some(c),
        }
    }
}

impl fmt::Display for Translate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Translate::AllOfQ => write!(f, "ALL"),
            Translate::Value(c) => write!(f, "{c}"),
        }
    }
}

/// Which concrete family of local height functions a model carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeightModel {
    /// Max-norm heights on `P^1 x P^1` (the split quadric).
    SplitQuadric,
    /// Max-norm heights on the blown-up plane with `n` marked points.
    OrbitClosure { n: u32 },
}

/// One boundary divisor of a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisorDatum {
    /// Index of the divisor in the model's list.
    pub id: usize,
    /// Short human-readable name, e.g. `x1=0`.
    pub label: String,
    /// `ord_{D_j}(a)`.
    pub ord_a: i64,
    /// `max_c ord_{D_j}(b - c)`.
    pub ord_b_max: i64,
    /// The maximizing translate.
    pub best_translate: Translate,
    /// `-ord_{D_j}(omega)`.
    pub anticanonical_mult: i64,
}

impl DivisorDatum {
    /// `ord_{D_j}(b - c)` for an arbitrary translate `c`, reconstructed from
    /// the stored maximum: away from the maximizing translate the order is 0
    /// when the maximum is positive, and equal to the maximum otherwise.
    pub fn ord_b_translate(&self, c: &Rat) -> i64 {
        match &self.best_translate {
            Translate::AllOfQ => self.ord_b_max,
            Translate::Value(c0) => {
                if c0 == c {
                    self.ord_b_max
                } else {
                    0
                }
            }
        }
    }

    /// A divisor is special when the maximal translate order equals `ord_a`.
    pub fn is_special(&self) -> bool {
        self.ord_b_max == self.ord_a
    }
}

/// A built-in surface model: validated divisor data plus bookkeeping.
#[derive(Clone, Debug)]
pub struct SurfaceModel {
    pub name: String,
    pub divisors: Vec<DivisorDatum>,
    /// `rank Pic(X) = |J| - 1`.
    pub rank_pic: usize,
    /// Primes at which the height or translate data degenerates.
    pub bad_primes: BTreeSet<u64>,
    pub height_model: Option<HeightModel>,
}

/// Partition of the divisor set according to the sign of `ord_a`, plus the
/// special subsets attached to translates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    /// `J_1`: divisors with `ord_a > 0`.
    pub zeros_of_a: Vec<usize>,
    /// `J_2`: divisors with `ord_a < 0`.
    pub poles_of_a: Vec<usize>,
    /// `J_3`: divisors with `ord_a = 0`.
    pub inert: Vec<usize>,
    /// `J_1^c` for each finite translate `c` that occurs: the divisors in
    /// `J_1` where `ord(b - c) = ord(a)`.
    pub special_zero: Vec<(Rat, Vec<usize>)>,
    /// `J_2^*`: divisors in `J_2` where `b/a` is a unit.
    pub special_pole: Vec<usize>,
}

impl Classification {
    /// `I^c`: divisors where `b - c` vanishes, for each occurring translate.
    pub fn positive_translate_locus(&self, model: &SurfaceModel, c: &Rat) -> Vec<usize> {
        model
            .divisors
            .iter()
            .filter(|d| d.ord_b_translate(c) > 0)
            .map(|d| d.id)
            .collect()
    }

    /// Number of special divisors with `ord_a < 0`.
    pub fn num_special_poles(&self) -> usize {
        self.special_pole.len()
    }

    /// Number of special divisors with `ord_a > 0`.
    pub fn num_special_zeros(&self) -> usize {
        self.special_zero.iter().map(|(_, v)| v.len()).sum()
    }
}

/// Outcome of one named invariant check.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Full report of `verify_geometry`.
#[derive(Clone, Debug)]
pub struct GeometryReport {
    pub model: String,
    pub checks: Vec<CheckResult>,
}

impl GeometryReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_names(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }
}

fn rat(n: i64) -> Rat {
    Rat::from(Int::from(n))
}

fn divisor(
    id: usize,
    label: &str,
    ord_a: i64,
    ord_b_max: i64,
    best: Translate,
    anticanonical_mult: i64,
) -> DivisorDatum {
    DivisorDatum {
        id,
        label: label.to_string(),
        ord_a,
        ord_b_max,
        best_translate: best,
        anticanonical_mult,
    }
}

/// Load one of the built-in models.
///
/// Accepted names: `ex1`/`ex1-split-quadric`, `ex2`/`ex2-a3a1-quartic`,
/// `ex3`/`ex3-orbit-closure` (the last takes the marked-point count `n`).
pub fn load_model(name: &str, n: Option<u32>) -> Result<SurfaceModel> {
    let model = match name {
        "ex1" | "ex1-split-quadric" => split_quadric(),
        "ex2" | "ex2-a3a1-quartic" => a3a1_quartic(),
        "ex3" | "ex3-orbit-closure" => {
            let n = n.ok_or_else(|| Error::InvalidParameter {
                name: "n",
                detail: "ex3 requires the marked-point count n".into(),
            })?;
            orbit_closure(n)?
        }
        other => {
            // allow `ex3-orbit-closure(5)` style names for table round-trips
            if let Some(rest) = other.strip_prefix("ex3-orbit-closure(") {
                if let Some(num) = rest.strip_suffix(')') {
                    let n: u32 = num.parse().map_err(|_| Error::UnknownModel(other.into()))?;
                    return load_model("ex3", Some(n));
                }
            }
            return Err(Error::UnknownModel(other.into()));
        }
    };
    validate(&model)?;
    Ok(model)
}

/// `P^1 x P^1` with `(a, b) -> ([1:a], [a:b])`.
///
/// Boundary: `D_1 = {x1=0}`, `D_2 = {x0=0}`, `D_3 = {t0=0}`.  Orders are
/// computed in the four bidegree charts; `omega` acquires a double pole
/// along `D_2` and `D_3` and is regular along `D_1`.
fn split_quadric() -> SurfaceModel {
    SurfaceModel {
        name: "ex1-split-quadric".into(),
        divisors: vec![
            divisor(0, "x1=0", 1, 1, Translate::Value(Rat::zero()), 0),
            divisor(1, "x0=0", -1, -1, Translate::AllOfQ, 2),
            divisor(2, "t0=0", 0, -1, Translate::AllOfQ, 2),
        ],
        rank_pic: 2,
        bad_primes: BTreeSet::new(),
        height_model: Some(HeightModel::SplitQuadric),
    }
}

/// Minimal desingularization of the split `A3+A1` quartic del Pezzo surface
/// `x0^2 + x0 x3 + x2 x4 = x1 x3 - x2^2 = 0`, as combinatorial data only.
///
/// The seven boundary lines are the strict transforms `l0', l1'', l2'',
/// l3''` together with the exceptional curves `l4', l5', l6` of the two
/// blowups.  Orders along `l1`, `l2`, `l0` are read off ambient equations;
/// the rest come from the explicit blow-up charts.
fn a3a1_quartic() -> SurfaceModel {
    SurfaceModel {
        name: "ex2-a3a1-quartic".into(),
        divisors: vec![
            divisor(0, "l0", -1, -1, Translate::AllOfQ, 2),
            divisor(1, "l1", 1, 1, Translate::Value(rat(1)), 0),
            divisor(2, "l2", 1, 1, Translate::Value(rat(2)), 0),
            divisor(3, "l3", -2, -3, Translate::AllOfQ, 4),
            divisor(4, "l4", 1, 0, Translate::AllOfQ, 1),
            divisor(5, "l5", -1, -2, Translate::AllOfQ, 3),
            divisor(6, "l6", 0, -1, Translate::AllOfQ, 2),
        ],
        rank_pic: 6,
        bad_primes: BTreeSet::new(),
        height_model: None,
    }
}

/// Orbit closure of `prod_{r in R}(x - r)` under `q(x) -> q(ax + b)`,
/// resolved as the blowup of `P^2` at the points `[0 : r : 1]`.
///
/// `R` is fixed as `{0, 1, ..., n-1}`; any faithful rational `R` would do,
/// and this choice keeps the bad primes small (primes dividing a difference
/// of two marked points, i.e. all `p <= n - 1`).
fn orbit_closure(n: u32) -> Result<SurfaceModel> {
    if n < 3 {
        return Err(Error::InvalidParameter {
            name: "n",
            detail: format!("ex3 requires n >= 3, got {n}"),
        });
    }
    let mut divisors = Vec::with_capacity(n as usize + 2);
    divisors.push(divisor(0, "a=0", 1, 0, Translate::AllOfQ, 1));
    for r in 0..n {
        divisors.push(divisor(
            (r + 1) as usize,
            &format!("E_{r}"),
            1,
            1,
            Translate::Value(rat(r as i64)),
            0,
        ));
    }
    divisors.push(divisor(
        (n + 1) as usize,
        "c=0",
        -1,
        -1,
        Translate::AllOfQ,
        2,
    ));

    let mut bad_primes = BTreeSet::new();
    for d in 1..n as u64 {
        for (p, _) in factorize(d) {
            bad_primes.insert(p);
        }
    }

    Ok(SurfaceModel {
        name: format!("ex3-orbit-closure({n})"),
        divisors,
        rank_pic: n as usize + 1,
        bad_primes,
        height_model: Some(HeightModel::OrbitClosure { n }),
    })
}

/// Partition the divisors of a valid model.
pub fn classify(model: &SurfaceModel) -> Classification {
    let mut zeros_of_a = Vec::new();
    let mut poles_of_a = Vec::new();
    let mut inert = Vec::new();
    for d in &model.divisors {
        match d.ord_a.cmp(&0) {
            std::cmp::Ordering::Greater => zeros_of_a.push(d.id),
            std::cmp::Ordering::Less => poles_of_a.push(d.id),
            std::cmp::Ordering::Equal => inert.push(d.id),
        }
    }

    let mut special_zero: Vec<(Rat, Vec<usize>)> = Vec::new();
    for d in &model.divisors {
        if d.ord_a > 0 && d.is_special() {
            // a positive maximal order pins a unique translate on valid
            // data; inconsistent rows (which verify_geometry flags) are
            // simply skipped here so classification stays total
            let Some(c) = d.best_translate.as_value().cloned() else {
                continue;
            };
            match special_zero.iter_mut().find(|(c0, _)| *c0 == c) {
                Some((_, v)) => v.push(d.id),
                None => special_zero.push((c, vec![d.id])),
            }
        }
    }
    special_zero.sort_by(|(a, _), (b, _)| a.cmp(b));

    // ord(b/a) = ord(b) - ord(a); for a pole of a, every translate has the
    // same order, so ord(b) is the stored maximum.
    let special_pole = model
        .divisors
        .iter()
        .filter(|d| d.ord_a < 0 && d.is_special())
        .map(|d| d.id)
        .collect();

    Classification {
        zeros_of_a,
        poles_of_a,
        inert,
        special_zero,
        special_pole,
    }
}

/// Run every divisor-level and model-level invariant and collect a report.
///
/// Failures are report entries, never errors.
pub fn verify_geometry(model: &SurfaceModel) -> GeometryReport {
    let mut checks = Vec::new();
    let mut push = |name: String, passed: bool, detail: String| {
        checks.push(CheckResult {
            name,
            passed,
            detail,
        });
    };

    for d in &model.divisors {
        let tag = format!("[{}]", d.label);
        push(
            format!("anticanonical-interior {tag}"),
            d.anticanonical_mult + d.ord_a >= 1,
            format!("d + u = {} >= 1", d.anticanonical_mult + d.ord_a),
        );
        push(
            format!("anticanonical-upper-bound {tag}"),
            d.anticanonical_mult <= 1 - d.ord_b_max,
            format!(
                "d = {} <= 1 - v = {}",
                d.anticanonical_mult,
                1 - d.ord_b_max
            ),
        );
        push(
            format!("translate-order-bound {tag}"),
            d.ord_b_max <= d.ord_a,
            format!("v = {} <= u = {}", d.ord_b_max, d.ord_a),
        );
        let all_iff = match &d.best_translate {
            Translate::AllOfQ => d.ord_b_max <= 0,
            Translate::Value(_) => d.ord_b_max > 0,
        };
        push(
            format!("argmax-shape {tag}"),
            all_iff,
            format!(
                "best translate {} consistent with v = {}",
                d.best_translate, d.ord_b_max
            ),
        );
    }

    push(
        "picard-rank".into(),
        model.rank_pic == model.divisors.len() - 1,
        format!(
            "rank = {} vs |J| - 1 = {}",
            model.rank_pic,
            model.divisors.len() - 1
        ),
    );

    let gcd = model
        .divisors
        .iter()
        .map(|d| d.ord_a.unsigned_abs())
        .fold(0u64, crate::arith::gcd_u64);
    push(
        "ord-a-gcd".into(),
        gcd == 1,
        format!("gcd of ord_a over J = {gcd}"),
    );

    let class = classify(model);
    push(
        "divisor-of-a-mixed-signs".into(),
        !class.zeros_of_a.is_empty() && !class.poles_of_a.is_empty(),
        format!(
            "|J_1| = {}, |J_2| = {}",
            class.zeros_of_a.len(),
            class.poles_of_a.len()
        ),
    );

    for (c, js) in &class.special_zero {
        let total = js.len() + class.special_pole.len();
        push(
            format!("critical-index-bound [c={c}]"),
            total <= model.rank_pic,
            format!("|J_1^c u J_2^*| = {} <= rank = {}", total, model.rank_pic),
        );
    }

    // distinct finite translates must differ by units outside the bad primes
    let finite: Vec<&Rat> = model
        .divisors
        .iter()
        .filter_map(|d| d.best_translate.as_value())
        .collect();
    for i in 0..finite.len() {
        for j in (i + 1)..finite.len() {
            if finite[i] == finite[j] {
                continue;
            }
            let diff = finite[i] - finite[j];
            let ok = rational_supported_on(&diff, &model.bad_primes);
            push(
                format!("translate-difference-unit [{} - {}]", finite[i], finite[j]),
                ok,
                format!("difference {diff} invertible outside bad primes"),
            );
        }
    }

    GeometryReport {
        model: model.name.clone(),
        checks,
    }
}

/// True when every prime factor of both numerator and denominator of `x`
/// lies in `allowed` (so `x` is a unit away from those primes).
fn rational_supported_on(x: &Rat, allowed: &BTreeSet<u64>) -> bool {
    if x.is_zero() {
        return false;
    }
    let check = |n: &Int| -> bool {
        let mut n = n.abs();
        for &p in allowed {
            let p = Int::from(p);
            while (&n % &p).is_zero() {
                n /= &p;
            }
        }
        n.is_one()
    };
    check(x.numer()) && check(x.denom())
}

fn validate(model: &SurfaceModel) -> Result<()> {
    let report = verify_geometry(model);
    if let Some(fail) = report.checks.iter().find(|c| !c.passed) {
        return Err(Error::InvalidModel {
            model: model.name.clone(),
            check: "geometry",
            detail: format!("{}: {}", fail.name, fail.detail),
        });
    }
    Ok(())
}

/// Validate an externally supplied model (used by the table parser).
pub fn validate_model(model: &SurfaceModel) -> Result<()> {
    validate(model)
}

impl SurfaceModel {
    pub fn num_divisors(&self) -> usize {
        self.divisors.len()
    }

    /// Vector of `ord_a` over the divisor list, the combinatorial `div(a)`.
    pub fn ord_a_vector(&self) -> Vec<i64> {
        self.divisors.iter().map(|d| d.ord_a).collect()
    }

    /// Vector of anticanonical multiplicities, the class of `-K_X`.
    pub fn anticanonical_vector(&self) -> Vec<i64> {
        self.divisors.iter().map(|d| d.anticanonical_mult).collect()
    }

    pub fn classify(&self) -> Classification {
        classify(self)
    }

    /// Serialize to the documented plain-text table: header directives
    /// followed by one `divisor` line per boundary component with columns
    /// `id label u v c_star d`.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("name {}\n", self.name));
        out.push_str(&format!("rank_pic {}\n", self.rank_pic));
        let primes = if self.bad_primes.is_empty() {
            "-".to_string()
        } else {
            self.bad_primes
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        out.push_str(&format!("bad_primes {primes}\n"));
        let hm = match self.height_model {
            None => "none".to_string(),
            Some(HeightModel::SplitQuadric) => "split-quadric".to_string(),
            Some(HeightModel::OrbitClosure { n }) => format!("orbit-closure:{n}"),
        };
        out.push_str(&format!("height_model {hm}\n"));
        for d in &self.divisors {
            out.push_str(&format!(
                "divisor {} {} {} {} {} {}\n",
                d.id, d.label, d.ord_a, d.ord_b_max, d.best_translate, d.anticanonical_mult
            ));
        }
        out
    }

    /// Parse the plain-text table format produced by [`Self::to_table`].
    /// The parsed model is re-validated.
    pub fn from_table(text: &str) -> Result<SurfaceModel> {
        let mut name = None;
        let mut rank_pic = None;
        let mut bad_primes = BTreeSet::new();
        let mut height_model = None;
        let mut divisors = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap();
            let err = |msg: &str| Error::MalformedTable(format!("line {}: {msg}", lineno + 1));
            match key {
                "name" => name = Some(parts.collect::<Vec<_>>().join(" ")),
                "rank_pic" => {
                    rank_pic = Some(
                        parts
                            .next()
                            .and_then(|s| s.parse::<usize>().ok())
                            .ok_or_else(|| err("bad rank_pic"))?,
                    )
                }
                "bad_primes" => {
                    let val = parts.next().ok_or_else(|| err("missing bad_primes"))?;
                    if val != "-" {
                        for piece in val.split(',') {
                            bad_primes
                                .insert(piece.parse::<u64>().map_err(|_| err("bad prime entry"))?);
                        }
                    }
                }
                "height_model" => {
                    let val = parts.next().ok_or_else(|| err("missing height_model"))?;
                    height_model = match val {
                        "none" => None,
                        "split-quadric" => Some(HeightModel::SplitQuadric),
                        other => match other.strip_prefix("orbit-closure:") {
                            Some(n) => Some(HeightModel::OrbitClosure {
                                n: n.parse().map_err(|_| err("bad orbit-closure count"))?,
                            }),
                            None => return Err(err("unknown height_model")),
                        },
                    };
                }
                "divisor" => {
                    let fields: Vec<&str> = parts.collect();
                    if fields.len() != 6 {
                        return Err(err("divisor line needs 6 fields"));
                    }
                    let id: usize = fields[0].parse().map_err(|_| err("bad id"))?;
                    let ord_a: i64 = fields[2].parse().map_err(|_| err("bad u"))?;
                    let ord_b_max: i64 = fields[3].parse().map_err(|_| err("bad v"))?;
                    let best = if fields[4] == "ALL" {
                        Translate::AllOfQ
                    } else {
                        Translate::Value(parse_rat(fields[4]).ok_or_else(|| err("bad c_star"))?)
                    };
                    let d: i64 = fields[5].parse().map_err(|_| err("bad d"))?;
                    divisors.push(DivisorDatum {
                        id,
                        label: fields[1].to_string(),
                        ord_a,
                        ord_b_max,
                        best_translate: best,
                        anticanonical_mult: d,
                    });
                }
                other => return Err(err(&format!("unknown directive `{other}`"))),
            }
        }
        let model = SurfaceModel {
            name: name.ok_or_else(|| Error::MalformedTable("missing name".into()))?,
            rank_pic: rank_pic.ok_or_else(|| Error::MalformedTable("missing rank_pic".into()))?,
            bad_primes,
            height_model,
            divisors,
        };
        validate(&model)?;
        Ok(model)
    }
}
