//! Distribution functions, weak and Lorentz norms, decreasing rearrangement,
//! amplitude splitting, weak-type interpolation and the `(L^1, L^inf)`
//! K-functional.
//!
//! A sampled function is a step function, so its distribution function
//! `d_f(a) = |{|f| > a}|` is an exact right-continuous step function with
//! jumps at the distinct sample magnitudes. Every quantity here is evaluated
//! in closed form on those steps; nothing is integrated numerically.

use crate::error::{Error, Result};
use crate::grid::{lp_quadrature, GridFunction};
use crate::report::InequalityReport;
use crate::scalar::{count, Scalar};
use crate::tolerance;

/// Step function `a -> d_f(a)`.
///
/// `measures[i]` is the value of `d_f` on `[thresholds[i], thresholds[i+1])`;
/// the last entry (at `max |f|`) is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionProfile<T> {
    pub thresholds: Vec<T>,
    pub measures: Vec<T>,
    /// Measure of the whole sampled box, the value of `d_f(a)` for `a < 0`.
    pub total: T,
}

impl<T: Scalar> DistributionProfile<T> {
    /// Evaluates `d_f(alpha)`.
    pub fn at(&self, alpha: T) -> T {
        if alpha < T::zero() {
            return self.total;
        }
        let i = self.thresholds.partition_point(|&t| t <= alpha);
        // thresholds[0] == 0, so i >= 1 for alpha >= 0
        self.measures[i - 1]
    }

    /// `p * int_0^inf a^{p-1} d_f(a) da`, summed per step.
    pub fn layer_cake(&self, p: T) -> T {
        self.thresholds
            .windows(2)
            .zip(&self.measures)
            .map(|(w, &m)| m * (w[1].powf(p) - w[0].powf(p)))
            .sum()
    }

    /// `sup_a a d_f(a)^{1/p}`, attained at the right end of some step.
    pub fn weak_norm(&self, p: T) -> T {
        let inv = p.recip();
        self.thresholds[1..]
            .iter()
            .zip(&self.measures)
            .map(|(&right, &m)| right * m.powf(inv))
            .fold(T::zero(), T::max)
    }
}

/// Decreasing rearrangement `f*` of a sampled function.
///
/// `f*(t) = star_values[j]` for `t` in `[breakpoints[j], breakpoints[j+1])`
/// and zero beyond the last breakpoint. Only positive magnitudes are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Rearrangement<T> {
    pub breakpoints: Vec<T>,
    pub star_values: Vec<T>,
    /// `d_f(a)` for `a < 0`.
    total: T,
}

impl<T: Scalar> Rearrangement<T> {
    /// Distribution function of `f*` on `[0, inf)`.
    pub fn distribution(&self) -> DistributionProfile<T> {
        let mut thresholds = vec![T::zero()];
        let mut measures = Vec::with_capacity(self.star_values.len() + 1);
        // ascending thresholds: 0, then the piece values from smallest up
        measures.push(*self.breakpoints.last().expect("at least one breakpoint"));
        for j in (0..self.star_values.len()).rev() {
            thresholds.push(self.star_values[j]);
            measures.push(self.breakpoints[j]);
        }
        DistributionProfile {
            thresholds,
            measures,
            total: self.total,
        }
    }

    /// `int_0^inf f*(t)^p dt`.
    pub fn power_integral(&self, p: T) -> T {
        self.star_values
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(&v, w)| v.powf(p) * (w[1] - w[0]))
            .sum()
    }

    /// `int_0^t f*(s) ds`.
    pub fn integral_up_to(&self, t: T) -> T {
        self.star_values
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(&v, w)| v * (t.min(w[1]) - w[0]).max(T::zero()))
            .sum()
    }

    /// Measure of the support, `|{f != 0}|`.
    pub fn support_measure(&self) -> T {
        *self.breakpoints.last().expect("at least one breakpoint")
    }
}

/// Distribution function of the samples of `f`.
pub fn distribution<T: Scalar>(f: &GridFunction<T>) -> DistributionProfile<T> {
    let vol = f.spec.cell_volume();
    let mut mags: Vec<T> = f.values.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let len = mags.len();
    let mut thresholds = vec![T::zero()];
    let mut measures = vec![count::<T>(len - mags.partition_point(|&m| m <= T::zero())) * vol];
    let mut i = mags.partition_point(|&m| m <= T::zero());
    while i < len {
        let value = mags[i];
        let mut j = i;
        while j < len && mags[j] == value {
            j += 1;
        }
        thresholds.push(value);
        measures.push(count::<T>(len - j) * vol);
        i = j;
    }
    DistributionProfile {
        thresholds,
        measures,
        total: count::<T>(len) * vol,
    }
}

/// Decreasing rearrangement of the samples of `f`.
pub fn rearrange<T: Scalar>(f: &GridFunction<T>) -> Rearrangement<T> {
    let vol = f.spec.cell_volume();
    let mut mags: Vec<T> = f
        .values
        .iter()
        .map(|v| v.abs())
        .filter(|&m| m > T::zero())
        .collect();
    mags.sort_by(|a, b| b.partial_cmp(a).expect("finite samples"));
    let mut breakpoints = vec![T::zero()];
    let mut star_values = Vec::new();
    let mut i = 0;
    while i < mags.len() {
        let value = mags[i];
        let mut j = i;
        while j < mags.len() && mags[j] == value {
            j += 1;
        }
        star_values.push(value);
        breakpoints.push(count::<T>(j) * vol);
        i = j;
    }
    Rearrangement {
        breakpoints,
        star_values,
        total: count::<T>(f.len()) * vol,
    }
}

fn finite_exponent<T: Scalar>(p: T, min: T, what: &str) -> Result<()> {
    if p >= min && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidExponent(format!("{what} needs finite p >= {min}, got {p}")))
    }
}

/// `p int_0^inf a^{p-1} d_f(a) da`, which equals `||f||_p^p`.
pub fn layer_cake_norm<T: Scalar>(f: &GridFunction<T>, p: T) -> Result<T> {
    finite_exponent(p, T::one(), "layer-cake norm")?;
    Ok(distribution(f).layer_cake(p))
}

/// Weak `L^{p,inf}` quasi-norm `sup_a a d_f(a)^{1/p}`.
pub fn weak_norm<T: Scalar>(f: &GridFunction<T>, p: T) -> Result<T> {
    finite_exponent(p, T::one(), "weak norm")?;
    Ok(distribution(f).weak_norm(p))
}

/// Lorentz quasi-norm `||f||_{L^{p,q}}`, integrated piecewise in closed form.
///
/// A constant piece `v` on `[t0, t1)` contributes
/// `v^q (p/q) (t1^{q/p} - t0^{q/p})` to `int (t^{1/p} f*)^q dt/t`.
pub fn lorentz_norm<T: Scalar>(f: &GridFunction<T>, p: T, q: T) -> Result<T> {
    if !(p > T::one() && p.is_finite()) {
        return Err(Error::InvalidExponent(format!("Lorentz norm needs finite p > 1, got {p}")));
    }
    if !(q >= T::one()) {
        return Err(Error::InvalidExponent(format!("Lorentz norm needs q >= 1, got {q}")));
    }
    Ok(lorentz_of(&rearrange(f), p, q))
}

pub(crate) fn lorentz_of<T: Scalar>(star: &Rearrangement<T>, p: T, q: T) -> T {
    let pieces = star.star_values.iter().zip(star.breakpoints.windows(2));
    if q.is_infinite() {
        let inv = p.recip();
        return pieces
            .map(|(&v, w)| v * w[1].powf(inv))
            .fold(T::zero(), T::max);
    }
    let e = q / p;
    let sum: T = pieces
        .map(|(&v, w)| v.powf(q) * (w[1].powf(e) - w[0].powf(e)))
        .sum();
    (sum * p / q).powf(q.recip())
}

/// Pointwise split `g = low + high` at amplitude `M`:
/// `low = g 1{|g| <= M}`, `high = g 1{|g| > M}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeSplit<T> {
    pub low: GridFunction<T>,
    pub high: GridFunction<T>,
    pub threshold: T,
}

/// Both sides of the two splitting estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitBounds<T> {
    /// `||low||_s^s`, or `||low||_inf` when `s = inf`.
    pub low_lhs: T,
    /// `s/(s-r) M^{s-r} ||g||_{r,inf}^r - M^s d_g(M)`, or `M` when `s = inf`.
    pub low_rhs: T,
    /// `||high||_t^t`.
    pub high_lhs: T,
    /// `r/(r-t) M^{t-r} ||g||_{r,inf}^r`.
    pub high_rhs: T,
}

impl<T: Scalar> SplitBounds<T> {
    pub fn holds(&self, rel: T) -> bool {
        self.low_lhs <= self.low_rhs * (T::one() + rel) && self.high_lhs <= self.high_rhs * (T::one() + rel)
    }
}

pub fn amplitude_split<T: Scalar>(g: &GridFunction<T>, threshold: T) -> Result<AmplitudeSplit<T>> {
    if !(threshold > T::zero()) {
        return Err(Error::InvalidValue(format!("split threshold {threshold} must be positive")));
    }
    let low = g.map(|v| if v.abs() <= threshold { v } else { T::zero() });
    let high = g.map(|v| if v.abs() > threshold { v } else { T::zero() });
    Ok(AmplitudeSplit {
        low,
        high,
        threshold,
    })
}

impl<T: Scalar> AmplitudeSplit<T> {
    /// Evaluates the low-part `L^s` and high-part `L^t` estimates in terms of
    /// `||g||_{r,inf}` for `1 <= t < r < s <= inf`.
    pub fn bounds(&self, g: &GridFunction<T>, t: T, r: T, s: T) -> Result<SplitBounds<T>> {
        if !(T::one() <= t && t < r && r < s && r.is_finite()) {
            return Err(Error::InvalidExponent(format!(
                "split bounds need 1 <= t < r < s, got t={t}, r={r}, s={s}"
            )));
        }
        let m = self.threshold;
        let profile = distribution(g);
        let weak_r = profile.weak_norm(r).powf(r);
        let (low_lhs, low_rhs) = if s.is_infinite() {
            (self.low.sup(), m)
        } else {
            let lhs = lp_quadrature(&self.low, s)?.powf(s);
            let rhs = s / (s - r) * m.powf(s - r) * weak_r - m.powf(s) * profile.at(m);
            (lhs, rhs)
        };
        let high_lhs = lp_quadrature(&self.high, t)?.powf(t);
        let high_rhs = r / (r - t) * m.powf(t - r) * weak_r;
        Ok(SplitBounds {
            low_lhs,
            low_rhs,
            high_lhs,
            high_rhs,
        })
    }
}

/// Constant in the weak-type interpolation bound
/// `||f||_r <= C ||f||_{p,inf}^theta ||f||_{q,inf}^{1-theta}`.
///
/// Split `r int a^{r-1} d_f` at a level `x`, bound `d_f` by the weak `p`
/// norm below and the weak `q` norm above:
/// `||f||_r^r <= r/(r-p) A^p x^{r-p} + r/(q-r) B^q x^{r-q}`.
/// Choosing `x^{q-p} = B^q / A^p` makes both terms equal to
/// `A^{r theta} B^{r(1-theta)}`, so `C = (r/(r-p) + r/(q-r))^{1/r}`.
/// For `q = inf` (weak `L^inf` read as `L^inf`, `x = ||f||_inf`) the second
/// term is absent.
pub fn interp_constant<T: Scalar>(p: T, r: T, q: T) -> T {
    let first = r / (r - p);
    let second = if q.is_infinite() { T::zero() } else { r / (q - r) };
    (first + second).powf(r.recip())
}

/// Interpolation weight `theta` with `1/r = theta/p + (1-theta)/q`.
pub fn interp_theta<T: Scalar>(p: T, r: T, q: T) -> T {
    (r.recip() - q.recip()) / (p.recip() - q.recip())
}

/// Checks `||f||_r <= C(p,r,q) ||f||_{p,inf}^theta ||f||_{q,inf}^{1-theta}`.
pub fn interp_bound_check<T: Scalar>(f: &GridFunction<T>, p: T, r: T, q: T) -> Result<InequalityReport<T>> {
    if !(T::one() <= p && p < r && r < q && r.is_finite()) {
        return Err(Error::InvalidExponent(format!(
            "interpolation needs 1 <= p < r < q, got p={p}, r={r}, q={q}"
        )));
    }
    let theta = interp_theta(p, r, q);
    let profile = distribution(f);
    let weak_p = profile.weak_norm(p);
    let weak_q = if q.is_infinite() { f.sup() } else { profile.weak_norm(q) };
    let lhs = lp_quadrature(f, r)?;
    let rhs = weak_p.powf(theta) * weak_q.powf(T::one() - theta);
    Ok(InequalityReport::new("weak-interpolation", lhs, rhs)
        .on(f)
        .with_param("p", crate::scalar::to_f64(p))
        .with_param("r", crate::scalar::to_f64(r))
        .with_param("q", crate::scalar::to_f64(q))
        .with_param("theta", crate::scalar::to_f64(theta))
        .with_bound(interp_constant(p, r, q), crate::scalar::lit(tolerance::INTERP_SLACK)))
}

/// `K(f, t) = inf ||f0||_1 + t ||f1||_inf` over `f = f0 + f1`, evaluated as
/// `int_0^t f*(s) ds`.
pub fn k_functional<T: Scalar>(f: &GridFunction<T>, t: T) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::InvalidValue(format!("K-functional needs t > 0, got {t}")));
    }
    Ok(rearrange(f).integral_up_to(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample, GeneratorId, GridSpec};
    use approx::assert_relative_eq;

    fn spec1(l: f64, n: usize) -> GridSpec<f64> {
        GridSpec::<f64>::new(1, l, n).unwrap()
    }

    fn unit_box() -> GridFunction<f64> {
        sample(spec1(2.0, 64), &GeneratorId::IndicatorBox { lo: 0.0, hi: 1.0 }).unwrap()
    }

    #[test]
    fn indicator_profile() {
        let d = distribution(&unit_box());
        assert_eq!(d.at(0.0), 1.0);
        assert_eq!(d.at(0.999), 1.0);
        assert_eq!(d.at(1.0), 0.0);
        assert_eq!(d.at(-1.0), 4.0);
        assert_eq!(*d.measures.last().unwrap(), 0.0);
    }

    #[test]
    fn tent_profile_tracks_line() {
        let s = spec1(2.0, 256);
        let f = sample(s, &GeneratorId::Tent).unwrap();
        let d = distribution(&f);
        for alpha in [0.0, 0.1, 0.37, 0.5, 0.9] {
            assert!((d.at(alpha) - 2.0 * (1.0 - alpha)).abs() <= 2.0 * s.cell_width());
        }
    }

    #[test]
    fn sign_does_not_matter() {
        let f = sample(spec1(4.0, 64), &GeneratorId::RandomMix { seed: 2 }).unwrap();
        assert_eq!(distribution(&f), distribution(&f.scale(-1.0)));
    }

    #[test]
    fn layer_cake_examples() {
        assert_relative_eq!(layer_cake_norm(&unit_box(), 2.0).unwrap(), 1.0, epsilon = 1e-14);
        let zero = GridFunction::zeros(spec1(1.0, 16));
        assert_eq!(layer_cake_norm(&zero, 3.0).unwrap(), 0.0);
        let f = sample(GridSpec::<f64>::new(2, 1.0, 32).unwrap(), &GeneratorId::TrigPoly { seed: 5, bandwidth: 3 }).unwrap();
        let direct = lp_quadrature(&f, 1.5).unwrap().powf(1.5);
        assert_relative_eq!(layer_cake_norm(&f, 1.5).unwrap(), direct, max_relative = 1e-12);
    }

    #[test]
    fn weak_norm_examples() {
        assert_relative_eq!(weak_norm(&unit_box(), 3.0).unwrap(), 1.0, epsilon = 1e-14);
        let s = spec1(2.0, 256);
        let tent = sample(s, &GeneratorId::Tent).unwrap();
        assert!((weak_norm(&tent, 1.0).unwrap() - 0.5).abs() <= 2.0 * s.cell_width());
    }

    #[test]
    fn power_law_weak_norm_is_bounded_while_strong_grows() {
        // |x|^{-1} in the plane: the sup is attained near the origin, where the
        // sampled profile is scale invariant, so it does not move with N
        let p = 2.0;
        let mut strong = Vec::new();
        let mut weak = Vec::new();
        for n in [64, 128, 256] {
            let s = GridSpec::<f64>::new(2, 1.0, n).unwrap();
            let f = sample(s, &GeneratorId::PowerLaw { a: 2.0 / p }).unwrap();
            weak.push(weak_norm(&f, p).unwrap());
            strong.push(lp_quadrature(&f, p).unwrap());
        }
        assert!(strong[0] < strong[1] && strong[1] < strong[2]);
        for w in &weak[1..] {
            assert_relative_eq!(*w, weak[0], max_relative = 1e-9);
        }
        assert!(weak[0] >= std::f64::consts::PI.sqrt());
    }

    #[test]
    fn rearrangement_examples() {
        let r = rearrange(&unit_box());
        assert_eq!(r.star_values, vec![1.0]);
        assert_eq!(r.breakpoints, vec![0.0, 1.0]);
        let s = spec1(2.0, 256);
        let tent = sample(s, &GeneratorId::Tent).unwrap();
        let r = rearrange(&tent);
        for (j, &v) in r.star_values.iter().enumerate() {
            let t = r.breakpoints[j];
            assert!((v - (1.0 - t / 2.0)).abs() <= s.cell_width());
        }
    }

    #[test]
    fn lorentz_matches_strong_and_weak() {
        let f = sample(GridSpec::<f64>::new(2, 1.0, 32).unwrap(), &GeneratorId::RandomMix { seed: 9 }).unwrap();
        for p in [1.5, 2.0, 3.0] {
            assert_relative_eq!(
                lorentz_norm(&f, p, p).unwrap(),
                lp_quadrature(&f, p).unwrap(),
                max_relative = 1e-10
            );
            assert_eq!(lorentz_norm(&f, p, f64::INFINITY).unwrap(), weak_norm(&f, p).unwrap());
        }
        assert!(lorentz_norm(&f, 1.0, 2.0).is_err());
        assert!(lorentz_norm(&f, 2.0, 0.5).is_err());
    }

    #[test]
    fn lorentz_indicator_closed_form() {
        // ||1_A||_{p,q} = (p/q)^{1/q} |A|^{1/p}
        let s = spec1(2.0, 64);
        let f = sample(s, &GeneratorId::IndicatorBox { lo: -0.5, hi: 1.0 }).unwrap();
        let (p, q) = (3.0, 1.5);
        assert_relative_eq!(
            lorentz_norm(&f, p, q).unwrap(),
            (p / q).powf(1.0 / q) * 1.5f64.powf(1.0 / p),
            max_relative = 1e-13
        );
    }

    #[test]
    fn amplitude_split_cases() {
        let s = spec1(2.0, 128);
        let tent = sample(s, &GeneratorId::Tent).unwrap();
        let all_low = amplitude_split(&tent, 2.0).unwrap();
        assert!(all_low.high.values.iter().all(|&v| v == 0.0));
        assert_eq!(all_low.low.values, tent.values);
        let smallest = tent.values.iter().cloned().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
        let all_high = amplitude_split(&tent, smallest / 2.0).unwrap();
        assert!(all_high.low.values.iter().all(|&v| v == 0.0));
        let half = amplitude_split(&tent, 0.5).unwrap();
        let sum = half.low.add(&half.high).unwrap();
        assert_eq!(sum.values, tent.values);
        assert!(half.low.sup() <= 0.5);
        let b = half.bounds(&tent, 1.0, 2.0, 4.0).unwrap();
        assert!(b.holds(0.0), "{b:?}");
        let b = half.bounds(&tent, 1.0, 2.0, f64::INFINITY).unwrap();
        assert!(b.holds(0.0));
        assert!(half.bounds(&tent, 2.0, 2.0, 4.0).is_err());
        assert!(half.bounds(&tent, 1.0, 2.0, 2.0).is_err());
        assert!(amplitude_split(&tent, 0.0).is_err());
    }

    #[test]
    fn interp_constant_matches_hand_value() {
        // (p, r, q) = (2, 3, 4): 3/1 + 3/1 = 6
        assert_relative_eq!(interp_constant(2.0, 3.0, 4.0), 6f64.powf(1.0 / 3.0));
        assert_relative_eq!(interp_theta(2.0, 3.0, 4.0), 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(interp_constant(2.0, 3.0, f64::INFINITY), 3f64.powf(1.0 / 3.0));
    }

    #[test]
    fn interp_indicator_and_zero() {
        let rep = interp_bound_check(&unit_box(), 2.0, 3.0, 4.0).unwrap();
        assert_relative_eq!(rep.ratio, 1.0, epsilon = 1e-14);
        assert!(rep.passed() && rep.scaled_ratio() < 1.0);
        let zero = GridFunction::zeros(spec1(1.0, 16));
        let rep = interp_bound_check(&zero, 2.0, 3.0, 4.0).unwrap();
        assert!(rep.degenerate && rep.passed());
        assert!(interp_bound_check(&zero, 3.0, 2.0, 4.0).is_err());
        let rep = interp_bound_check(&unit_box(), 2.0, 3.0, f64::INFINITY).unwrap();
        assert!(rep.passed());
    }

    #[test]
    fn k_functional_examples() {
        let f = unit_box();
        for t in [0.25, 0.5, 1.0, 2.0] {
            assert_relative_eq!(k_functional(&f, t).unwrap(), t.min(1.0), epsilon = 1e-14);
        }
        let g = sample(spec1(4.0, 64), &GeneratorId::Tent).unwrap();
        assert_relative_eq!(
            k_functional(&g, 100.0).unwrap(),
            lp_quadrature(&g, 1.0).unwrap(),
            max_relative = 1e-13
        );
        assert!(k_functional(&g, 0.0).is_err());
    }

    #[test]
    fn single_precision_profile_is_exact() {
        let s = GridSpec::<f32>::new(1, 4.0, 64).unwrap();
        let f = sample(s, &GeneratorId::RandomMix { seed: 1 }).unwrap();
        assert_eq!(distribution(&f), rearrange(&f).distribution());
    }
}
