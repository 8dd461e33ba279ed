//! Full-space convolution of sampled functions and the Young inequalities.
//!
//! Both operands are zero-padded to `2N` points per axis, so the FFT product
//! is the exact linear convolution
//! `c_m = h^n sum_j f_j g_{m-j}` with no wraparound.
//! Sample `c_m` sits at `-2L + (m + 1) h` on each axis, which is the
//! doubled-grid midpoint shifted by `h/2`; [`ConvolutionResult::offset`]
//! records that shift.

use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::fourier::{self, fft_nd};
use crate::grid::{dilate, lp_quadrature, GridFunction};
use crate::measure::weak_norm;
use crate::report::InequalityReport;
use crate::scalar::{count, lit, to_f64, Scalar};
use crate::tolerance;

/// `f * g` on the doubled box `[-2L, 2L)^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvolutionResult<T> {
    pub value: GridFunction<T>,
    /// Per-axis shift from the doubled-grid midpoints to the sample locations.
    pub offset: T,
    /// Generator names of the operands, when known.
    pub operands: (Option<String>, Option<String>),
}

fn name<T: Scalar>(f: &GridFunction<T>) -> Option<String> {
    f.generator.as_ref().map(|g| g.id.to_string())
}

/// Copies `f` into the low corner `[0, N)^n` of a `(2N)^n` array.
fn corner_pad<T: Scalar>(f: &GridFunction<T>) -> Vec<Complex<T>> {
    let big = f.spec.doubled();
    let mut out = vec![Complex::new(T::zero(), T::zero()); big.len()];
    for (idx, &v) in f.values.iter().enumerate() {
        out[big.ravel(&f.spec.unravel(idx))] = Complex::new(v, T::zero());
    }
    out
}

pub fn convolve<T: Scalar>(f: &GridFunction<T>, g: &GridFunction<T>) -> Result<ConvolutionResult<T>> {
    if f.spec != g.spec {
        return Err(Error::MismatchedSpecs);
    }
    let big = f.spec.doubled();
    let (n, size) = (big.n, big.points);
    let mut a = corner_pad(f);
    let mut b = corner_pad(g);
    fft_nd(&mut a, n, size, false);
    fft_nd(&mut b, n, size, false);
    for (x, y) in a.iter_mut().zip(&b) {
        *x = *x * *y;
    }
    fft_nd(&mut a, n, size, true);
    let scale = f.spec.cell_volume() / count::<T>(big.len());
    let values = a.into_iter().map(|c| c.re * scale).collect();
    Ok(ConvolutionResult {
        value: GridFunction {
            spec: big,
            generator: None,
            values,
        },
        offset: f.spec.cell_width() / lit(2.0),
        operands: (name(f), name(g)),
    })
}

/// Largest `|F[f*g] e^{-2 pi i xi . offset} - F[f] F[g]|` on the doubled
/// lattice, relative to the largest product coefficient.
pub fn convolution_theorem_defect<T: Scalar>(f: &GridFunction<T>, g: &GridFunction<T>) -> Result<T> {
    let conv = convolve(f, g)?;
    let lhs = fourier::forward(&conv.value);
    let ff = fourier::forward(&f.zero_pad());
    let fg = fourier::forward(&g.zero_pad());
    let two_pi = lit::<T>(2.0) * T::PI();
    let mut worst = T::zero();
    let mut top = T::zero();
    for i in 0..lhs.coeffs.len() {
        let xi = lhs.frequency(i);
        let shift: T = xi[..f.spec.n].iter().copied().sum::<T>() * conv.offset;
        let product = ff.coeffs[i] * fg.coeffs[i];
        let shifted = lhs.coeffs[i] * Complex::from_polar(T::one(), -two_pi * shift);
        worst = worst.max((shifted - product).norm());
        top = top.max(product.norm());
    }
    Ok(if top == T::zero() { worst } else { worst / top })
}

/// Refuses tuples off the scaling line `1/p + 1 = 1/q + 1/r`.
pub fn young_gate<T: Scalar>(p: T, q: T, r: T) -> Result<()> {
    for (label, e) in [("p", p), ("q", q), ("r", r)] {
        if !(e >= T::one()) {
            return Err(Error::InvalidExponent(format!("Young exponent {label} = {e} is below 1")));
        }
    }
    let defect = p.recip() + T::one() - q.recip() - r.recip();
    if defect.abs() > lit(1e-12) {
        return Err(Error::InadmissibleTuple(format!(
            "1/p + 1 = 1/q + 1/r fails at (p, q, r) = ({p}, {q}, {r})"
        )));
    }
    Ok(())
}

fn young_report<T: Scalar>(name: &str, conv: &ConvolutionResult<T>, f: &GridFunction<T>, lhs: T, rhs: T, pqr: [T; 3]) -> InequalityReport<T> {
    let mut rep = InequalityReport::new(name, lhs, rhs)
        .on(f)
        .with_param("p", to_f64(pqr[0]))
        .with_param("q", to_f64(pqr[1]))
        .with_param("r", to_f64(pqr[2]));
    if let (Some(a), Some(b)) = &conv.operands {
        rep.function = Some(format!("{a}*{b}"));
    }
    rep
}

/// `||f * g||_p <= ||f||_q ||g||_r`.
pub fn young_strong_check<T: Scalar>(f: &GridFunction<T>, g: &GridFunction<T>, p: T, q: T, r: T) -> Result<InequalityReport<T>> {
    young_gate(p, q, r)?;
    let conv = convolve(f, g)?;
    let lhs = lp_quadrature(&conv.value, p)?;
    let rhs = lp_quadrature(f, q)? * lp_quadrature(g, r)?;
    Ok(young_report("young-strong", &conv, f, lhs, rhs, [p, q, r]).with_bound(T::one(), lit(tolerance::YOUNG_SLACK)))
}

fn open_exponents<T: Scalar>(p: T, q: T, r: T, r_min_inclusive: bool) -> Result<()> {
    let ok_r = if r_min_inclusive { r >= T::one() } else { r > T::one() };
    if !(p > T::one() && q > T::one() && ok_r && p.is_finite() && q.is_finite() && r.is_finite()) {
        return Err(Error::InvalidExponent(format!(
            "exponents ({p}, {q}, {r}) outside the admissible open range"
        )));
    }
    young_gate(p, q, r)
}

/// `||f * g||_{p,inf} <= C ||f||_{q,inf} ||g||_r`; the ratio estimates `C`.
pub fn young_weak_check<T: Scalar>(f: &GridFunction<T>, g: &GridFunction<T>, p: T, q: T, r: T) -> Result<InequalityReport<T>> {
    open_exponents(p, q, r, true)?;
    let conv = convolve(f, g)?;
    let lhs = weak_norm(&conv.value, p)?;
    let rhs = weak_norm(f, q)? * lp_quadrature(g, r)?;
    Ok(young_report("young-weak", &conv, f, lhs, rhs, [p, q, r]))
}

/// `||f * g||_p <= C ||f||_{q,inf} ||g||_r`, with the weak left side
/// recorded in `extras["weak_lhs"]` and checked against the strong one.
pub fn young_sharp_check<T: Scalar>(f: &GridFunction<T>, g: &GridFunction<T>, p: T, q: T, r: T) -> Result<InequalityReport<T>> {
    open_exponents(p, q, r, false)?;
    let conv = convolve(f, g)?;
    let lhs = lp_quadrature(&conv.value, p)?;
    let weak_lhs = weak_norm(&conv.value, p)?;
    let rhs = weak_norm(f, q)? * lp_quadrature(g, r)?;
    let mut rep = young_report("young-sharp", &conv, f, lhs, rhs, [p, q, r]).with_extra("weak_lhs", weak_lhs);
    if weak_lhs > lhs {
        rep.violate(format!("weak norm {weak_lhs} of f*g exceeds its strong norm {lhs}"));
    }
    Ok(rep)
}

/// Largest `|ratio(lambda) / ratio(1) - 1|` over `lambda in {1/2, 2}` when
/// both operands are dilated together. `None` when an operand cannot be
/// dilated inside the box or the base ratio vanishes.
pub fn joint_dilation_drift<T: Scalar>(
    f: &GridFunction<T>,
    g: &GridFunction<T>,
    check: impl Fn(&GridFunction<T>, &GridFunction<T>) -> Result<InequalityReport<T>>,
) -> Result<Option<T>> {
    let base = check(f, g)?.ratio;
    if base == T::zero() {
        return Ok(None);
    }
    let mut drift = T::zero();
    for lambda in [lit::<T>(0.5), lit(2.0)] {
        let (df, dg) = match (dilate(f, lambda), dilate(g, lambda)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(Error::SupportEscape { .. }), _) | (_, Err(Error::SupportEscape { .. })) => return Ok(None),
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        drift = drift.max((check(&df, &dg)?.ratio / base - T::one()).abs());
    }
    Ok(Some(drift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample, GeneratorId, GridSpec};
    use approx::assert_relative_eq;

    fn spec(n: usize, l: f64, pts: usize) -> GridSpec<f64> {
        GridSpec::new(n, l, pts).unwrap()
    }

    /// Direct linear convolution in doubled-grid storage.
    fn direct(f: &GridFunction<f64>, g: &GridFunction<f64>) -> Vec<f64> {
        let big = f.spec.doubled();
        let mut out = vec![0.0; big.len()];
        for (i, &a) in f.values.iter().enumerate() {
            let mi = f.spec.unravel(i);
            for (j, &b) in g.values.iter().enumerate() {
                let mj = f.spec.unravel(j);
                let sum: Vec<usize> = (0..f.spec.n).map(|k| mi[k] + mj[k]).collect();
                out[big.ravel(&sum)] += a * b * f.spec.cell_volume();
            }
        }
        out
    }

    #[test]
    fn matches_direct_sum() {
        for n in [1, 2] {
            let s = spec(n, 2.0, 8);
            let f = sample(s, &GeneratorId::RandomMix { seed: 1 }).unwrap();
            let g = sample(s, &GeneratorId::Tent).unwrap();
            let fast = convolve(&f, &g).unwrap();
            for (a, b) in fast.value.values.iter().zip(direct(&f, &g)) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn indicator_tent() {
        let s = spec(1, 2.0, 64);
        let box_ = sample(s, &GeneratorId::IndicatorBox { lo: -0.5, hi: 0.5 }).unwrap();
        let c = convolve(&box_, &box_).unwrap();
        // location -2L + (m + 1) h = 0 at m = N - 1
        assert!((c.value.values[63] - 1.0).abs() < 1e-12);
        assert_relative_eq!(lp_quadrature(&c.value, 1.0).unwrap(), 1.0, max_relative = 1e-12);
        let rep = young_strong_check(&box_, &box_, 1.0, 1.0, 1.0).unwrap();
        assert!(rep.passed() && (rep.ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spike_is_approximate_identity() {
        let s = spec(1, 2.0, 64);
        let f = sample(s, &GeneratorId::Tent).unwrap();
        let mut spike = GridFunction::zeros(s);
        spike.values[32] = 1.0 / s.cell_width();
        let c = convolve(&f, &spike).unwrap();
        // spike at h/2: output for x_j lands at x_j + h/2, stored at midpoint x_j
        let big = s.doubled();
        for j in 0..s.points {
            let x = s.midpoint(j);
            let m = big.locate(&[x]).unwrap();
            assert!((c.value.values[m] - f.values[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn commutative_and_bilinear() {
        let s = spec(2, 2.0, 16);
        let f = sample(s, &GeneratorId::RandomMix { seed: 3 }).unwrap();
        let g = sample(s, &GeneratorId::Gaussian).unwrap();
        let h = sample(s, &GeneratorId::Tent).unwrap();
        let fg = convolve(&f, &g).unwrap().value;
        let gf = convolve(&g, &f).unwrap().value;
        for (a, b) in fg.values.iter().zip(&gf.values) {
            assert!((a - b).abs() < 1e-12);
        }
        let lhs = convolve(&f.combine(2.0, &h, -3.0).unwrap(), &g).unwrap().value;
        let fh = convolve(&h, &g).unwrap().value;
        for i in 0..lhs.len() {
            assert!((lhs.values[i] - (2.0 * fg.values[i] - 3.0 * fh.values[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn support_stays_in_minkowski_sum() {
        let s = spec(1, 4.0, 64);
        let a = sample(s, &GeneratorId::IndicatorBox { lo: 0.0, hi: 1.0 }).unwrap();
        let b = sample(s, &GeneratorId::IndicatorBox { lo: -2.0, hi: -1.5 }).unwrap();
        let c = convolve(&a, &b).unwrap();
        let big = s.doubled();
        for (m, &v) in c.value.values.iter().enumerate() {
            let x = big.midpoint(m) + c.offset;
            if !(-2.0..=-0.5).contains(&x) {
                assert!(v.abs() < 1e-12, "{x} -> {v}");
            }
        }
    }

    #[test]
    fn convolution_theorem_holds() {
        let s = spec(2, 2.0, 16);
        let f = sample(s, &GeneratorId::RandomMix { seed: 5 }).unwrap();
        let g = sample(s, &GeneratorId::TrigPoly { seed: 2, bandwidth: 2 }).unwrap();
        assert!(convolution_theorem_defect(&f, &g).unwrap() < 1e-10);
    }

    #[test]
    fn young_examples() {
        let s = spec(1, 8.0, 256);
        let g = sample(s, &GeneratorId::Gaussian).unwrap();
        let rep = young_strong_check(&g, &g, 2.0, 1.0, 2.0).unwrap();
        assert!(rep.passed() && rep.ratio < 1.0);
        let zero = GridFunction::zeros(s);
        let rep = young_strong_check(&g, &zero, 2.0, 1.0, 2.0).unwrap();
        assert!(rep.degenerate && rep.passed());
        assert!(matches!(young_strong_check(&g, &g, 2.0, 2.0, 2.0), Err(Error::InadmissibleTuple(_))));
        assert!(young_strong_check(&g, &zero.zero_pad(), 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn weak_and_sharp_chain() {
        let s = spec(1, 4.0, 256);
        let (p, q, r) = (4.0, 2.0, 4.0 / 3.0);
        // |x|^{-1/q}: weak L^q but not strong L^q
        let f = sample(s, &GeneratorId::PowerLaw { a: 1.0 / q }).unwrap();
        let g = sample(s, &GeneratorId::Gaussian).unwrap();
        let weak = young_weak_check(&f, &g, p, q, r).unwrap();
        let sharp = young_sharp_check(&f, &g, p, q, r).unwrap();
        assert!(weak.ratio.is_finite() && sharp.ratio.is_finite());
        assert!(weak.lhs <= sharp.lhs && sharp.passed());
        assert_eq!(sharp.extras["weak_lhs"], weak.lhs);
        let strong_q = young_strong_check(&g, &g, p, q, r).unwrap();
        let weak_q = young_weak_check(&g, &g, p, q, r).unwrap();
        assert!(weak_q.rhs_core <= strong_q.rhs_core);
        let zero = GridFunction::zeros(s);
        assert!(young_sharp_check(&zero, &g, p, q, r).unwrap().degenerate);
        assert!(young_sharp_check(&f, &g, 2.0, 2.0, 1.0).is_err());
        assert!(young_weak_check(&f, &g, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn sharp_ratio_stable_under_joint_dilation() {
        let s = spec(1, 8.0, 1024);
        let mut recipe = crate::grid::Generator::plain(GeneratorId::Gaussian);
        recipe.band_limit = Some(3.0);
        let f = crate::grid::sample_recipe(s, &recipe).unwrap();
        recipe.dilation = 0.75;
        let g = crate::grid::sample_recipe(s, &recipe).unwrap();
        let (p, q, r) = (4.0, 2.0, 4.0 / 3.0);
        let drift = joint_dilation_drift(&f, &g, |a, b| young_sharp_check(a, b, p, q, r))
            .unwrap()
            .expect("dilation fits");
        assert!(drift < 0.02, "drift {drift}");
    }
}
