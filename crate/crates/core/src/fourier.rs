//! Discrete Fourier transform with the `e^{-2 pi i x . xi}` convention,
//! Plancherel, homogeneous Sobolev norms and sharp frequency cutoffs.
//!
//! Coefficients live on the dual lattice `xi_k = k / (2L)` with
//! `k` in `[-N/2, N/2)^n`, stored row-major in the same order as the samples
//! (storage index `i` holds `k = i - N/2`). The dual cell volume is
//! `(2L)^{-n}`, which makes the discrete transform an isometry.
//!
//! Because samples sit at cell midpoints `x_j = -L + (j + 1/2) h`, the
//! Riemann sum `h^n sum_j e^{-2 pi i xi_k x_j} f(x_j)` equals the plain DFT
//! times the per-axis phase `e^{i pi k (N-1)/N}`; the transform applies that
//! phase exactly rather than shifting samples.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec, MAX_DIM};
use crate::report::InequalityReport;
use crate::scalar::{count, lit, to_f64, Scalar};
use crate::tolerance;

/// Fourier coefficients of a function sampled on `spec`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralFunction<T> {
    pub spec: GridSpec<T>,
    pub coeffs: Vec<Complex<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct SpectralJson<T> {
    spec: GridSpec<T>,
    /// `re, im` pairs.
    coeffs: Vec<T>,
}

impl<T: Scalar> Serialize for SpectralFunction<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SpectralJson {
            spec: self.spec,
            coeffs: self.coeffs.iter().flat_map(|c| [c.re, c.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for SpectralFunction<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = SpectralJson::<T>::deserialize(deserializer)?;
        raw.spec.validate().map_err(D::Error::custom)?;
        if raw.coeffs.len() != 2 * raw.spec.len() {
            return Err(D::Error::custom(format!(
                "expected {} interleaved values, got {}",
                2 * raw.spec.len(),
                raw.coeffs.len()
            )));
        }
        Ok(Self {
            spec: raw.spec,
            coeffs: raw
                .coeffs
                .chunks_exact(2)
                .map(|c| Complex::new(c[0], c[1]))
                .collect(),
        })
    }
}

impl<T: Scalar> SpectralFunction<T> {
    pub fn zeros(spec: GridSpec<T>) -> Self {
        Self {
            spec,
            coeffs: vec![Complex::new(T::zero(), T::zero()); spec.len()],
        }
    }

    /// Integer frequency vector of storage index `idx`.
    pub fn mode(&self, idx: usize) -> [i64; MAX_DIM] {
        mode(&self.spec, idx)
    }

    /// Physical frequency `xi_k = k / (2L)` of storage index `idx`.
    pub fn frequency(&self, idx: usize) -> [T; MAX_DIM] {
        frequency(&self.spec, idx)
    }

    /// Storage index of the integer frequency `k`, if it lies on the lattice.
    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        let half = (self.spec.points / 2) as i64;
        let mut multi = [0usize; MAX_DIM];
        for (m, &ki) in multi.iter_mut().zip(k.iter().take(self.spec.n)) {
            if ki < -half || ki >= half {
                return None;
            }
            *m = (ki + half) as usize;
        }
        Some(self.spec.ravel(&multi))
    }

    /// `(2L)^{-n}`.
    pub fn dual_volume(&self) -> T {
        dual_volume(&self.spec)
    }

    /// `(sum_k |F_k|^q (2L)^{-n})^{1/q}`; `q = inf` gives the largest modulus.
    pub fn lq_norm(&self, q: T) -> Result<T> {
        if !(q >= T::one()) {
            return Err(Error::InvalidExponent(format!("spectral L^q needs q >= 1, got {q}")));
        }
        let sup = self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.norm()));
        if q.is_infinite() || sup == T::zero() {
            return Ok(sup);
        }
        let sum: T = self.coeffs.iter().map(|c| (c.norm() / sup).powf(q)).sum();
        Ok(sup * (sum * self.dual_volume()).powf(q.recip()))
    }

    /// Largest `|F_k|` over modes with `|xi_k| > radius`.
    pub fn max_beyond(&self, radius: T) -> T {
        (0..self.coeffs.len())
            .filter(|&i| norm(&self.frequency(i)[..self.spec.n]) > radius)
            .map(|i| self.coeffs[i].norm())
            .fold(T::zero(), T::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spectral function serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidValue(format!("malformed spectral JSON: {e}")))
    }
}

pub(crate) fn dual_volume<T: Scalar>(spec: &GridSpec<T>) -> T {
    (lit::<T>(2.0) * spec.half_width).powi(spec.n as i32).recip()
}

fn mode<T: Scalar>(spec: &GridSpec<T>, idx: usize) -> [i64; MAX_DIM] {
    let multi = spec.unravel(idx);
    let half = (spec.points / 2) as i64;
    let mut k = [0i64; MAX_DIM];
    for axis in 0..spec.n {
        k[axis] = multi[axis] as i64 - half;
    }
    k
}

fn frequency<T: Scalar>(spec: &GridSpec<T>, idx: usize) -> [T; MAX_DIM] {
    let k = mode(spec, idx);
    let scale = (lit::<T>(2.0) * spec.half_width).recip();
    let mut xi = [T::zero(); MAX_DIM];
    for axis in 0..spec.n {
        xi[axis] = lit::<T>(k[axis] as f64) * scale;
    }
    xi
}

fn norm<T: Scalar>(x: &[T]) -> T {
    x.iter().map(|&c| c * c).sum::<T>().sqrt()
}

/// Midpoint phase `e^{i pi k (N-1)/N}` for `k = i - N/2`, indexed by `i`.
fn phases<T: Scalar>(points: usize) -> Vec<Complex<T>> {
    let half = (points / 2) as i64;
    (0..points)
        .map(|i| {
            let k = i as i64 - half;
            // reduce k (N-1) mod 2N before scaling to keep the angle small
            let num = (k * (points as i64 - 1)).rem_euclid(2 * points as i64);
            let angle = T::PI() * count::<T>(num as usize) / count::<T>(points);
            Complex::new(angle.cos(), angle.sin())
        })
        .collect()
}

/// In-place DFT along every axis of a row-major `points^n` array
/// (unnormalized, forward sign `-`).
pub(crate) fn fft_nd<T: Scalar>(data: &mut [Complex<T>], n: usize, points: usize, inverse: bool) {
    let mut planner = FftPlanner::<T>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(points)
    } else {
        planner.plan_fft_forward(points)
    };
    let mut line = vec![Complex::new(T::zero(), T::zero()); points];
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
    let total = data.len();
    for axis in 0..n {
        let stride = points.pow((n - 1 - axis) as u32);
        let block = stride * points;
        for start in (0..total).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, value) in line.iter().enumerate() {
                    data[base + j * stride] = *value;
                }
            }
        }
    }
}

/// Permutes between centered storage (`k = i - N/2`) and DFT order
/// (`k mod N`) along every axis, multiplying by `weight(i)` per axis.
fn recenter<T: Scalar>(
    spec: &GridSpec<T>,
    src: &[Complex<T>],
    weights: &[Complex<T>],
    to_dft: bool,
) -> Vec<Complex<T>> {
    let half = spec.points / 2;
    let mut out = vec![Complex::new(T::zero(), T::zero()); src.len()];
    for (idx, &value) in src.iter().enumerate() {
        let multi = spec.unravel(idx);
        let mut target = [0usize; MAX_DIM];
        let mut w = Complex::new(T::one(), T::zero());
        for axis in 0..spec.n {
            // centered index i has DFT index (i + N/2) mod N, and vice versa
            let i = multi[axis];
            target[axis] = (i + half) % spec.points;
            let centered = if to_dft { i } else { target[axis] };
            w = w * weights[centered];
        }
        out[spec.ravel(&target)] = value * w;
    }
    out
}

/// `F_k = h^n sum_j e^{-2 pi i xi_k . x_j} f(x_j)`.
pub fn forward<T: Scalar>(f: &GridFunction<T>) -> SpectralFunction<T> {
    forward_complex(&f.spec, f.values.iter().map(|&v| Complex::new(v, T::zero())).collect())
}

fn forward_complex<T: Scalar>(spec: &GridSpec<T>, mut data: Vec<Complex<T>>) -> SpectralFunction<T> {
    fft_nd(&mut data, spec.n, spec.points, false);
    let vol = spec.cell_volume();
    let weights: Vec<_> = phases::<T>(spec.points).into_iter().map(|p| p * vol.powf(count::<T>(spec.n).recip())).collect();
    // data is in DFT order; move to centered order
    let coeffs = recenter(spec, &data, &weights, false);
    SpectralFunction { spec: *spec, coeffs }
}

/// `f(x_j) = (2L)^{-n} sum_k e^{2 pi i xi_k . x_j} F_k`, all of it complex.
pub fn inverse_complex<T: Scalar>(spec: &SpectralFunction<T>) -> Vec<Complex<T>> {
    let s = &spec.spec;
    let dual = dual_volume(s).powf(count::<T>(s.n).recip());
    let weights: Vec<_> = phases::<T>(s.points).into_iter().map(|p| p.conj() * dual).collect();
    let mut data = recenter(s, &spec.coeffs, &weights, true);
    fft_nd(&mut data, s.n, s.points, true);
    data
}

/// Real part of the inverse transform.
pub fn inverse<T: Scalar>(spec: &SpectralFunction<T>) -> GridFunction<T> {
    let values = inverse_complex(spec).into_iter().map(|c| c.re).collect();
    GridFunction {
        spec: spec.spec,
        generator: None,
        values,
    }
}

/// Transform of complex samples, the exact left inverse of [`inverse_complex`].
pub fn forward_of_complex<T: Scalar>(spec: &GridSpec<T>, samples: &[Complex<T>]) -> SpectralFunction<T> {
    forward_complex(spec, samples.to_vec())
}

/// `| ||F||_2 - ||f||_2 | / ||f||_2`, zero for the zero function.
pub fn plancherel_defect<T: Scalar>(f: &GridFunction<T>) -> T {
    let two = lit::<T>(2.0);
    let physical = crate::grid::lp_quadrature(f, two).expect("p = 2 is admissible");
    if physical == T::zero() {
        return T::zero();
    }
    let spectral = forward(f).lq_norm(two).expect("q = 2 is admissible");
    (spectral - physical).abs() / physical
}

/// `(sum_k |xi_k|^{2s} |F_k|^2 (2L)^{-n})^{1/2}`, the homogeneous `H^s` norm.
pub fn sobolev_norm<T: Scalar>(f: &GridFunction<T>, s: T) -> Result<T> {
    if !(s >= T::zero() && s.is_finite()) {
        return Err(Error::InvalidExponent(format!("Sobolev order must be finite and >= 0, got {s}")));
    }
    Ok(sobolev_of(&forward(f), s))
}

pub(crate) fn sobolev_of<T: Scalar>(spectrum: &SpectralFunction<T>, s: T) -> T {
    let n = spectrum.spec.n;
    let sum: T = spectrum
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let xi = norm(&spectrum.frequency(i)[..n]);
            let weight = if s == T::zero() {
                T::one()
            } else {
                xi.powf(lit::<T>(2.0) * s)
            };
            weight * c.norm_sqr()
        })
        .sum();
    (sum * spectrum.dual_volume()).sqrt()
}

/// Largest `|xi_k|` on the lattice, attained at the corner mode.
pub fn nyquist_radius<T: Scalar>(spec: &GridSpec<T>) -> T {
    count::<T>(spec.points) / (lit::<T>(4.0) * spec.half_width) * count::<T>(spec.n).sqrt()
}

/// Whether storage index `idx` is kept by the cutoff at `radius`.
///
/// Modes with any component equal to `-N/2` have no conjugate partner on the
/// lattice, so the real part of their inverse does not reproduce them; they
/// always go to the high part.
fn kept<T: Scalar>(spec: &GridSpec<T>, idx: usize, radius: T) -> bool {
    let multi = spec.unravel(idx);
    if multi[..spec.n].contains(&0) {
        return false;
    }
    norm(&frequency(spec, idx)[..spec.n]) <= radius
}

/// `(f_{<R}, f_{>R})` by a sharp spectral cutoff at `|xi| <= R`.
///
/// The high part is `f - f_{<R}`, so the two parts sum to `f`. When `R`
/// reaches [`nyquist_radius`] nothing is cut and `(f, 0)` is returned.
pub fn frequency_split<T: Scalar>(f: &GridFunction<T>, radius: T) -> Result<(GridFunction<T>, GridFunction<T>)> {
    if !(radius > T::zero()) {
        return Err(Error::InvalidValue(format!("cutoff radius {radius} must be positive")));
    }
    if radius >= nyquist_radius(&f.spec) {
        return Ok((f.clone(), GridFunction::zeros(f.spec)));
    }
    let mut spectrum = forward(f);
    for (i, c) in spectrum.coeffs.iter_mut().enumerate() {
        if !kept(&f.spec, i, radius) {
            *c = Complex::new(T::zero(), T::zero());
        }
    }
    let low = inverse(&spectrum);
    let high = f.combine(T::one(), &low, -T::one())?;
    Ok((low, high))
}

/// Largest spectral magnitude beyond `radius`, relative to the largest
/// overall; zero for the zero function.
pub fn band_leakage<T: Scalar>(f: &GridFunction<T>, radius: T) -> T {
    let spectrum = forward(f);
    let top = spectrum.lq_norm(T::infinity()).expect("q = inf is admissible");
    if top == T::zero() {
        return T::zero();
    }
    spectrum.max_beyond(radius) / top
}

/// Checks that `f` is band-limited to `radius` up to [`tolerance::BAND_LEAKAGE`].
pub fn require_band_limited<T: Scalar>(f: &GridFunction<T>, radius: T) -> Result<()> {
    let leak = band_leakage(f, radius);
    if leak > lit(tolerance::BAND_LEAKAGE) {
        return Err(Error::Precondition(format!(
            "spectrum leaks {leak} beyond radius {radius}"
        )));
    }
    Ok(())
}

/// Surface area of the unit sphere in `R^n`, `n <= 3`.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI,
        _ => f64::NAN,
    }
}

/// `(int_{|xi| <= 1} |xi|^{-2s} d xi)^{1/2}` for `0 <= s < n/2`.
pub fn eps_low_constant(n: usize, s: f64) -> f64 {
    (sphere_area(n) / (n as f64 - 2.0 * s)).sqrt()
}

/// Checks `||f_{<R}||_inf <= C_s R^{n/p} ||f||_{H^s}` with
/// `s = n (1/2 - 1/p)`, `2 <= p < inf`.
pub fn eps_low_check<T: Scalar>(f: &GridFunction<T>, p: T, radius: T) -> Result<InequalityReport<T>> {
    if !(p >= lit(2.0) && p.is_finite()) {
        return Err(Error::InvalidExponent(format!("low-frequency bound needs 2 <= p < inf, got {p}")));
    }
    let n = count::<T>(f.spec.n);
    let s = n * (lit::<T>(0.5) - p.recip());
    let (low, _) = frequency_split(f, radius)?;
    let lhs = low.sup();
    let rhs = radius.powf(n / p) * sobolev_norm(f, s)?;
    let constant = lit(eps_low_constant(f.spec.n, to_f64(s)));
    Ok(InequalityReport::new("eps-low-frequency", lhs, rhs)
        .on(f)
        .with_param("p", to_f64(p))
        .with_param("s", to_f64(s))
        .with_param("R", to_f64(radius))
        .with_bound(constant, T::zero()))
}

/// Multiplier of the reproducing mollifier: `1` on `|eta| <= 1`, `0` on
/// `|eta| >= 2`, smooth in between.
pub fn mollifier_symbol<T: Scalar>(eta: T) -> T {
    let one = T::one();
    if eta <= one {
        return one;
    }
    if eta >= lit(2.0) {
        return T::zero();
    }
    let bump = |t: T| if t > T::zero() { (-t.recip()).exp() } else { T::zero() };
    let t = eta - one;
    bump(one - t) / (bump(one - t) + bump(t))
}

/// `(D_{1/R} phi) * f`, computed as the multiplier `phi_hat(xi / R)`.
pub fn mollify<T: Scalar>(f: &GridFunction<T>, radius: T) -> Result<GridFunction<T>> {
    if !(radius > T::zero()) {
        return Err(Error::InvalidValue(format!("mollifier radius {radius} must be positive")));
    }
    let mut spectrum = forward(f);
    for i in 0..spectrum.coeffs.len() {
        let eta = norm(&spectrum.frequency(i)[..f.spec.n]) / radius;
        spectrum.coeffs[i] = spectrum.coeffs[i] * mollifier_symbol(eta);
    }
    Ok(inverse(&spectrum))
}
