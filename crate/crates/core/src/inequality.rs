//! Exponent algebra and the verification harness for the interpolation
//! inequalities: each verifier evaluates both sides on a sampled function,
//! records the ratio, and where the inequality is scale invariant measures
//! how much the ratio moves under dilation.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bmo::{self, DyadicCube};
use crate::convolve;
use crate::error::{Error, Result};
use crate::fourier;
use crate::grid::{dilate, lp_quadrature, sample_recipe, Generator, GeneratorId, GridFunction, GridSpec};
use crate::measure::{interp_bound_check, lorentz_norm, weak_norm};
use crate::report::InequalityReport;
use crate::scalar::{count, lit, to_f64, Scalar};
use crate::tolerance;

/// Exponents of `||f||_p <= c ||f||_{q,inf}^theta ||f||_{H^s}^{1-theta}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ExponentTuple<T> {
    pub n: usize,
    pub p: T,
    pub q: T,
    pub s: T,
    pub theta: T,
}

/// `1/2 - s/n`, the reciprocal Lebesgue exponent matching `H^s` by scaling.
fn sobolev_reciprocal<T: Scalar>(n: usize, s: T) -> T {
    lit::<T>(0.5) - s / count::<T>(n)
}

/// Solves `1/p = theta/q + (1 - theta)(1/2 - s/n)` for `theta`.
///
/// Rejects tuples outside `1 <= q < p < inf`, `s >= 0`,
/// `s > n (1/2 - 1/p)`; together these put `theta` in `(0, 1)`.
pub fn solve_theta<T: Scalar>(n: usize, p: T, q: T, s: T) -> Result<ExponentTuple<T>> {
    if !(1..=crate::grid::MAX_DIM).contains(&n) {
        return Err(Error::InadmissibleTuple(format!("dimension {n} outside 1..=3")));
    }
    if !(q >= T::one() && q < p && p.is_finite()) {
        return Err(Error::InadmissibleTuple(format!("need 1 <= q < p < inf, got p = {p}, q = {q}")));
    }
    let beta = sobolev_reciprocal(n, s);
    if !(s >= T::zero() && beta < p.recip()) {
        return Err(Error::InadmissibleTuple(format!(
            "need s >= 0 and s > n (1/2 - 1/p), got s = {s} at n = {n}, p = {p}"
        )));
    }
    let theta = (p.recip() - beta) / (q.recip() - beta);
    if !(theta > T::zero() && theta <= T::one()) {
        return Err(Error::InadmissibleTuple(format!("theta = {theta} outside (0, 1]")));
    }
    Ok(ExponentTuple { n, p, q, s, theta })
}

impl<T: Scalar> ExponentTuple<T> {
    /// Residual of the defining relation.
    pub fn relation_defect(&self) -> T {
        let beta = sobolev_reciprocal(self.n, self.s);
        (self.p.recip() - self.theta / self.q - (T::one() - self.theta) * beta).abs()
    }

    /// The same tuple with `theta` moved off the relation, for negative
    /// controls.
    pub fn perturbed(&self, delta: T) -> Self {
        Self {
            theta: self.theta + delta,
            ..*self
        }
    }

    fn params(&self) -> [(&'static str, f64); 5] {
        [
            ("n", self.n as f64),
            ("p", to_f64(self.p)),
            ("q", to_f64(self.q)),
            ("s", to_f64(self.s)),
            ("theta", to_f64(self.theta)),
        ]
    }
}

/// Largest `|ratio(D_lambda f) / ratio(f) - 1|` over `lambda in {1/2, 2}`.
///
/// `None` when the dilated support leaves the box, the family fills the
/// box, or the base ratio vanishes.
pub fn dilation_drift<T: Scalar>(
    f: &GridFunction<T>,
    check: impl Fn(&GridFunction<T>) -> Result<InequalityReport<T>>,
) -> Result<Option<T>> {
    if f.support_radius().is_none() {
        return Ok(None);
    }
    let base = check(f)?.ratio;
    if base == T::zero() || !base.is_finite() {
        return Ok(None);
    }
    let mut drift = T::zero();
    for lambda in [lit::<T>(0.5), lit(2.0)] {
        let scaled = match dilate(f, lambda) {
            Ok(g) => g,
            Err(Error::SupportEscape { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        drift = drift.max((check(&scaled)?.ratio / base - T::one()).abs());
    }
    Ok(Some(drift))
}

fn attach_drift<T: Scalar>(mut rep: InequalityReport<T>, drift: Option<T>) -> InequalityReport<T> {
    rep.scaling_drift = drift;
    if let Some(d) = drift {
        if d > lit(tolerance::SCALING_DRIFT) {
            rep.violate(format!("ratio drifts by {d} under dilation"));
        }
    }
    rep
}

fn gn1_core<T: Scalar>(f: &GridFunction<T>, t: &ExponentTuple<T>) -> Result<InequalityReport<T>> {
    let lhs = lp_quadrature(f, t.p)?;
    let weak = weak_norm(f, t.q)?;
    let sobolev = fourier::sobolev_norm(f, t.s)?;
    let mix = |a: T| a.powf(t.theta) * sobolev.powf(T::one() - t.theta);
    let rhs = mix(weak);
    let strong_rhs = mix(lp_quadrature(f, t.q)?);
    let mut rep = InequalityReport::new("gn1", lhs, rhs).on(f).with_extra("strong_rhs", strong_rhs);
    for (k, v) in t.params() {
        rep = rep.with_param(k, v);
    }
    if rhs > strong_rhs * (T::one() + lit(tolerance::ORDERING_REL)) {
        rep.violate(format!("weak right side {rhs} exceeds the strong one {strong_rhs}"));
    }
    Ok(rep)
}

/// `||f||_p` against `||f||_{q,inf}^theta ||f||_{H^s}^{1-theta}`.
///
/// `extras["strong_rhs"]` carries the same product with the strong `L^q`
/// norm, which must dominate.
pub fn verify_gn1<T: Scalar>(f: &GridFunction<T>, t: &ExponentTuple<T>) -> Result<InequalityReport<T>> {
    let rep = gn1_core(f, t)?;
    let drift = dilation_drift(f, |g| gn1_core(g, t))?;
    Ok(attach_drift(rep, drift))
}

fn bmo_gate<T: Scalar>(p: T, q: T) -> Result<()> {
    if !(q >= T::one() && q < p && p.is_finite()) {
        return Err(Error::InadmissibleTuple(format!("need 1 <= q < p < inf, got p = {p}, q = {q}")));
    }
    Ok(())
}

/// `||f||_{q,inf}^{q/p} ||f||_BMO^{1-q/p}` with the dyadic BMO norm.
fn bmo_rhs<T: Scalar>(f: &GridFunction<T>, p: T, q: T) -> Result<T> {
    let theta = q / p;
    let b = bmo::bmo_norm(f, bmo::finest_level(&f.spec))?;
    if b == T::zero() && f.sup() > T::zero() {
        return Err(Error::Degenerate("constant function has zero mean oscillation".into()));
    }
    Ok(weak_norm(f, q)?.powf(theta) * b.powf(T::one() - theta))
}

fn gn2_core<T: Scalar>(f: &GridFunction<T>, p: T, q: T) -> Result<InequalityReport<T>> {
    let lhs = lp_quadrature(f, p)?;
    Ok(InequalityReport::new("gn2", lhs, bmo_rhs(f, p, q)?)
        .on(f)
        .with_param("p", to_f64(p))
        .with_param("q", to_f64(q))
        .with_param("theta", to_f64(q / p)))
}

/// `||f||_p` against `||f||_{q,inf}^{q/p} ||f||_BMO^{1-q/p}`.
pub fn verify_gn2<T: Scalar>(f: &GridFunction<T>, p: T, q: T) -> Result<InequalityReport<T>> {
    bmo_gate(p, q)?;
    let rep = gn2_core(f, p, q)?;
    let drift = dilation_drift(f, |g| gn2_core(g, p, q))?;
    Ok(attach_drift(rep, drift))
}

/// `(1/p)^{1-1/p}`, the nesting constant in `||f||_{p,p} <= C ||f||_{p,1}`.
pub fn lorentz_nesting_constant<T: Scalar>(p: T) -> T {
    p.recip().powf(T::one() - p.recip())
}

fn lorentz_core<T: Scalar>(f: &GridFunction<T>, p: T, q: T) -> Result<InequalityReport<T>> {
    let lhs = lorentz_norm(f, p, T::one())?;
    let lpp = lorentz_norm(f, p, p)?;
    let bound = lorentz_nesting_constant(p) * lhs;
    let mut rep = InequalityReport::new("lorentz-gn", lhs, bmo_rhs(f, p, q)?)
        .on(f)
        .with_param("p", to_f64(p))
        .with_param("q", to_f64(q))
        .with_extra("lorentz_pp", lpp)
        .with_extra("nesting_bound", bound);
    if lpp > bound * (T::one() + lit(tolerance::ORDERING_REL)) {
        rep.violate(format!("L^(p,p) norm {lpp} exceeds the nesting bound {bound}"));
    }
    Ok(rep)
}

/// `||f||_{p,1}` against `||f||_{q,inf}^{q/p} ||f||_BMO^{1-q/p}`, with the
/// nesting `||f||_{p,p} <= (1/p)^{1-1/p} ||f||_{p,1}` checked on the side.
pub fn verify_lorentz_gn<T: Scalar>(f: &GridFunction<T>, p: T, q: T) -> Result<InequalityReport<T>> {
    bmo_gate(p, q)?;
    if !(q > T::one()) {
        return Err(Error::InadmissibleTuple(format!("need q > 1, got {q}")));
    }
    let rep = lorentz_core(f, p, q)?;
    let drift = dilation_drift(f, |g| lorentz_core(g, p, q))?;
    Ok(attach_drift(rep, drift))
}

/// `||f||_{p,inf} <= (r/p)^{1/r} ||f||_{p,r}`; equality for indicators.
pub fn verify_lorentz_nesting<T: Scalar>(f: &GridFunction<T>, p: T, r: T) -> Result<InequalityReport<T>> {
    if !(r >= T::one() && r.is_finite()) {
        return Err(Error::InvalidExponent(format!("nesting needs finite r >= 1, got {r}")));
    }
    let lhs = lorentz_norm(f, p, T::infinity())?;
    let rhs = lorentz_norm(f, p, r)?;
    Ok(InequalityReport::new("lorentz-nesting", lhs, rhs)
        .on(f)
        .with_param("p", to_f64(p))
        .with_param("r", to_f64(r))
        .with_bound((r / p).powf(r.recip()), lit(tolerance::ORDERING_REL)))
}

fn eps_core<T: Scalar>(f: &GridFunction<T>, p: T) -> Result<InequalityReport<T>> {
    let s = count::<T>(f.spec.n) * (lit::<T>(0.5) - p.recip());
    Ok(InequalityReport::new("eps", lp_quadrature(f, p)?, fourier::sobolev_norm(f, s)?)
        .on(f)
        .with_param("p", to_f64(p))
        .with_param("s", to_f64(s)))
}

/// `||f||_p` against `||f||_{H^s}` at `s = n (1/2 - 1/p)`.
pub fn verify_eps<T: Scalar>(f: &GridFunction<T>, p: T) -> Result<InequalityReport<T>> {
    if !(p > lit(2.0) && p.is_finite()) {
        return Err(Error::InvalidExponent(format!("endpoint Sobolev needs 2 < p < inf, got {p}")));
    }
    let rep = eps_core(f, p)?;
    let drift = dilation_drift(f, |g| eps_core(g, p))?;
    Ok(attach_drift(rep, drift))
}

fn bernstein_core<T: Scalar>(f: &GridFunction<T>, p: T, q: T, radius: T) -> Result<InequalityReport<T>> {
    fourier::require_band_limited(f, radius)?;
    let n = count::<T>(f.spec.n);
    let rhs = radius.powf(n * (p.recip() - q.recip())) * weak_norm(f, p)?;
    Ok(InequalityReport::new("bernstein", lp_quadrature(f, q)?, rhs)
        .on(f)
        .with_param("p", to_f64(p))
        .with_param("q", to_f64(q))
        .with_param("R", to_f64(radius)))
}

/// `||f||_q` against `R^{n(1/p - 1/q)} ||f||_{p,inf}` for `f` with spectrum
/// in `B(0, R)`. The drift dilates `f` and rescales `R` together; it needs a
/// band-limited recipe so the dilated copy is cut at the rescaled radius.
pub fn verify_bernstein<T: Scalar>(f: &GridFunction<T>, p: T, q: T, radius: T) -> Result<InequalityReport<T>> {
    if !(p >= T::one() && p < q && q.is_finite()) {
        return Err(Error::InvalidExponent(format!("Bernstein needs 1 <= p < q < inf, got p = {p}, q = {q}")));
    }
    if !(radius > T::zero()) {
        return Err(Error::InvalidValue(format!("band radius {radius} must be positive")));
    }
    let rep = bernstein_core(f, p, q, radius)?;
    let mut drift = None;
    let recipe_limited = f.generator.as_ref().is_some_and(|g| g.band_limit.is_some());
    if recipe_limited && f.support_radius().is_some() && rep.ratio > T::zero() {
        let mut worst = T::zero();
        for lambda in [lit::<T>(0.5), lit(2.0)] {
            match dilate(f, lambda) {
                Ok(g) => {
                    let moved = bernstein_core(&g, p, q, radius / lambda)?.ratio;
                    worst = worst.max((moved / rep.ratio - T::one()).abs());
                }
                Err(Error::SupportEscape { .. }) => {
                    worst = T::nan();
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        drift = (!worst.is_nan()).then_some(worst);
    }
    Ok(attach_drift(rep, drift))
}

/// `||F f||_{p'}` against `||f||_p` for `1 <= p <= 2`, constant one.
pub fn verify_hausdorff_young<T: Scalar>(f: &GridFunction<T>, p: T) -> Result<InequalityReport<T>> {
    if !(p >= T::one() && p <= lit(2.0)) {
        return Err(Error::InvalidExponent(format!("Hausdorff-Young needs 1 <= p <= 2, got {p}")));
    }
    let q = if p == T::one() { T::infinity() } else { p / (p - T::one()) };
    let lhs = fourier::forward(f).lq_norm(q)?;
    let exact = p == T::one() || p == lit(2.0);
    let slack = if exact {
        tolerance::HAUSDORFF_YOUNG_EXACT
    } else {
        tolerance::HAUSDORFF_YOUNG_SLACK
    };
    Ok(InequalityReport::new("hausdorff-young", lhs, lp_quadrature(f, p)?)
        .on(f)
        .with_param("p", to_f64(p))
        .with_param("q", to_f64(q))
        .with_bound(T::one(), lit(slack)))
}

/// Which inequality a sweep evaluates, with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "ineq", rename_all = "kebab-case", bound = "T: Scalar")]
pub enum Verifier<T> {
    Gn1 { tuple: ExponentTuple<T> },
    Gn2 { p: T, q: T },
    Lorentz { p: T, q: T },
    LorentzNesting { p: T, r: T },
    Eps { p: T },
    Bernstein { p: T, q: T, radius: T },
    /// Second operand is `partner` sampled on the same grid.
    Young { p: T, q: T, r: T, partner: GeneratorId },
    YoungWeak { p: T, q: T, r: T, partner: GeneratorId },
    YoungSharp { p: T, q: T, r: T, partner: GeneratorId },
    HausdorffYoung { p: T },
    Interp { p: T, r: T, q: T },
    JohnNirenberg { alphas: Option<Vec<T>> },
    Hn2Bmo,
}

impl<T: Scalar> Verifier<T> {
    /// Prepares the sampling recipe; Bernstein needs a band-limited input.
    pub fn recipe(&self, gen: &Generator<T>) -> Generator<T> {
        let mut g = gen.clone();
        if let Verifier::Bernstein { radius, .. } = self {
            g.band_limit = Some(g.band_limit.map_or(*radius, |b| b.min(*radius)));
        }
        g
    }

    pub fn run(&self, f: &GridFunction<T>) -> Result<InequalityReport<T>> {
        let partner = |id: &GeneratorId| crate::grid::sample(f.spec, id);
        let joint = |rep: InequalityReport<T>, g: &GridFunction<T>, check: &dyn Fn(&GridFunction<T>, &GridFunction<T>) -> Result<InequalityReport<T>>| {
            convolve::joint_dilation_drift(f, g, check).map(|d| attach_drift(rep, d))
        };
        match self {
            Verifier::Gn1 { tuple } => verify_gn1(f, tuple),
            Verifier::Gn2 { p, q } => verify_gn2(f, *p, *q),
            Verifier::Lorentz { p, q } => verify_lorentz_gn(f, *p, *q),
            Verifier::LorentzNesting { p, r } => verify_lorentz_nesting(f, *p, *r),
            Verifier::Eps { p } => verify_eps(f, *p),
            Verifier::Bernstein { p, q, radius } => verify_bernstein(f, *p, *q, *radius),
            Verifier::Young { p, q, r, partner: id } => convolve::young_strong_check(f, &partner(id)?, *p, *q, *r),
            Verifier::YoungWeak { p, q, r, partner: id } => {
                let g = partner(id)?;
                let check = |a: &GridFunction<T>, b: &GridFunction<T>| convolve::young_weak_check(a, b, *p, *q, *r);
                joint(check(f, &g)?, &g, &check)
            }
            Verifier::YoungSharp { p, q, r, partner: id } => {
                let g = partner(id)?;
                let check = |a: &GridFunction<T>, b: &GridFunction<T>| convolve::young_sharp_check(a, b, *p, *q, *r);
                joint(check(f, &g)?, &g, &check)
            }
            Verifier::HausdorffYoung { p } => verify_hausdorff_young(f, *p),
            Verifier::Interp { p, r, q } => interp_bound_check(f, *p, *r, *q),
            Verifier::JohnNirenberg { alphas } => {
                let root = DyadicCube::root(f.spec.n);
                let alphas = match alphas {
                    Some(a) => a.clone(),
                    None => bmo::default_alphas(bmo::bmo_norm(f, bmo::finest_level(&f.spec))?),
                };
                bmo::jn_decay_check(f, &root, &alphas)
            }
            Verifier::Hn2Bmo => bmo::hn2_bmo_check(f),
        }
    }
}

/// Aggregate over a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SweepSummary<T> {
    pub max_ratio: Option<T>,
    pub median_ratio: Option<T>,
    pub worst_drift: Option<T>,
    pub corpus_size: usize,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SweepReport<T> {
    pub reports: Vec<InequalityReport<T>>,
    pub summary: SweepSummary<T>,
}

fn failure_report<T: Scalar>(verifier: &Verifier<T>, gen: &Generator<T>, spec: GridSpec<T>, err: &Error) -> InequalityReport<T> {
    let name = serde_json::to_value(verifier)
        .ok()
        .and_then(|v| v.get("ineq").and_then(|s| s.as_str()).map(str::to_string))
        .unwrap_or_else(|| "unknown".into());
    let mut rep = InequalityReport::new(&name, T::zero(), T::zero());
    rep.function = Some(gen.id.to_string());
    rep.spec = Some(spec);
    rep.note = Some(err.to_string());
    rep
}

/// Runs `verifier` on every generator, grid and dilation, in parallel.
///
/// Inputs that fail (degenerate, out-of-box dilation, leaking spectrum) are
/// kept as degenerate reports carrying the error in `note`. Reports are
/// sorted by identity so the output does not depend on scheduling.
pub fn sweep<T: Scalar>(corpus: &[Generator<T>], specs: &[GridSpec<T>], dilations: &[T], verifier: &Verifier<T>) -> SweepReport<T> {
    let jobs: Vec<(Generator<T>, GridSpec<T>)> = corpus
        .iter()
        .flat_map(|g| {
            specs.iter().flat_map(move |s| {
                dilations.iter().map(move |&d| {
                    let mut g = g.clone();
                    g.dilation = g.dilation * d;
                    (g, *s)
                })
            })
        })
        .collect();
    let mut reports: Vec<InequalityReport<T>> = jobs
        .par_iter()
        .map(|(gen, spec)| {
            let recipe = verifier.recipe(gen);
            let outcome = sample_recipe(*spec, &recipe).and_then(|f| verifier.run(&f));
            let mut rep = outcome.unwrap_or_else(|e| failure_report(verifier, &recipe, *spec, &e));
            if recipe.dilation != T::one() {
                rep.params.insert("dilation".into(), to_f64(recipe.dilation));
            }
            rep
        })
        .collect();
    reports.sort_by(|a, b| {
        a.identity_key()
            .cmp(&b.identity_key())
            .then_with(|| format!("{:?}", a.params).cmp(&format!("{:?}", b.params)))
    });
    let summary = summarize(&reports);
    SweepReport { reports, summary }
}

pub fn summarize<T: Scalar>(reports: &[InequalityReport<T>]) -> SweepSummary<T> {
    let mut ratios: Vec<T> = reports.iter().filter(|r| !r.degenerate).map(|r| r.ratio).collect();
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let median = if ratios.is_empty() {
        None
    } else if ratios.len() % 2 == 1 {
        Some(ratios[ratios.len() / 2])
    } else {
        let k = ratios.len() / 2;
        Some((ratios[k - 1] + ratios[k]) / lit(2.0))
    };
    SweepSummary {
        max_ratio: ratios.last().copied(),
        median_ratio: median,
        worst_drift: reports.iter().filter_map(|r| r.scaling_drift).reduce(T::max),
        corpus_size: reports.len(),
        violations: reports.iter().filter(|r| !r.passed()).count(),
    }
}

impl<T: Scalar> SweepReport<T> {
    /// One JSON object per line: every report, then the summary.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.reports {
            out.push_str(&serde_json::to_string(r).expect("report serializes"));
            out.push('\n');
        }
        let summary = serde_json::json!({ "summary": self.summary });
        out.push_str(&summary.to_string());
        out.push('\n');
        out
    }

    pub fn to_csv(&self) -> String {
        reports_to_csv(&self.reports)
    }
}

/// CSV projection, one row per report.
pub fn reports_to_csv<T: Scalar>(reports: &[InequalityReport<T>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "name", "function", "n", "L", "N", "params", "lhs", "rhs_core", "ratio", "constant", "scaling_drift", "degenerate", "violations",
    ])
    .expect("in-memory write");
    for r in reports {
        let opt = |v: Option<T>| v.map(|x| x.to_string()).unwrap_or_default();
        let params: BTreeMap<_, _> = r.params.iter().collect();
        let params = params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";");
        let (n, l, pts) = r
            .spec
            .map(|s| (s.n.to_string(), s.half_width.to_string(), s.points.to_string()))
            .unwrap_or_default();
        w.write_record([
            r.name.clone(),
            r.function.clone().unwrap_or_default(),
            n,
            l,
            pts,
            params,
            r.lhs.to_string(),
            r.rhs_core.to_string(),
            r.ratio.to_string(),
            opt(r.constant),
            opt(r.scaling_drift),
            r.degenerate.to_string(),
            r.violations.join("; "),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 csv")
}
