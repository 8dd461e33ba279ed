//! Uniform midpoint grids on centered boxes, test-function generators,
//! quadrature and dilation.
//!
//! A [`GridFunction`] holds `N^n` samples taken at cell midpoints of the box
//! `[-L, L)^n`, stored row-major with the last axis fastest. Outside the box
//! the function is identically zero.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier;
use crate::scalar::{count, lit, Scalar};

/// Largest supported dimension.
pub const MAX_DIM: usize = 3;

/// Radius beyond which `exp(-pi r^2)` drops below `1e-12`.
const GAUSSIAN_EFFECTIVE_RADIUS: f64 = 2.973_525_5;

/// Discretization of the box `[-L, L)^n` into `N` cells per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GridSpec<T> {
    pub n: usize,
    #[serde(rename = "L")]
    pub half_width: T,
    #[serde(rename = "N")]
    pub points: usize,
}

impl<T: Scalar> GridSpec<T> {
    pub fn new(n: usize, half_width: T, points: usize) -> Result<Self> {
        let spec = Self {
            n,
            half_width,
            points,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_DIM).contains(&self.n) {
            return Err(Error::InvalidGrid(format!(
                "dimension {} not in 1..=3",
                self.n
            )));
        }
        if !(self.half_width > T::zero() && self.half_width.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "half-width {} must be positive",
                self.half_width
            )));
        }
        if self.points < 8 || !self.points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "{} points per axis; need a power of two >= 8",
                self.points
            )));
        }
        Ok(())
    }

    /// Cell width `h = 2L/N`.
    pub fn cell_width(&self) -> T {
        lit::<T>(2.0) * self.half_width / count(self.points)
    }

    /// Cell volume `h^n`.
    pub fn cell_volume(&self) -> T {
        self.cell_width().powi(self.n as i32)
    }

    /// Total number of samples `N^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume of the whole box.
    pub fn box_volume(&self) -> T {
        (lit::<T>(2.0) * self.half_width).powi(self.n as i32)
    }

    /// Midpoint coordinate of cell `k` along one axis.
    pub fn midpoint(&self, k: usize) -> T {
        -self.half_width + (count::<T>(k) + lit(0.5)) * self.cell_width()
    }

    /// Row-major multi-index of a flat index; unused axes are zero.
    pub fn unravel(&self, mut idx: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        for axis in (0..self.n).rev() {
            out[axis] = idx % self.points;
            idx /= self.points;
        }
        out
    }

    pub fn ravel(&self, multi: &[usize]) -> usize {
        multi[..self.n]
            .iter()
            .fold(0, |acc, &k| acc * self.points + k)
    }

    /// Midpoint of the cell with flat index `idx`.
    pub fn point(&self, idx: usize) -> [T; MAX_DIM] {
        let multi = self.unravel(idx);
        let mut x = [T::zero(); MAX_DIM];
        for axis in 0..self.n {
            x[axis] = self.midpoint(multi[axis]);
        }
        x
    }

    /// The box `[-2L, 2L)^n` with the same cell width.
    pub fn doubled(&self) -> Self {
        Self {
            n: self.n,
            half_width: self.half_width + self.half_width,
            points: 2 * self.points,
        }
    }

    /// Index of the cell containing `x`, or `None` outside the box.
    pub fn locate(&self, x: &[T]) -> Option<usize> {
        let h = self.cell_width();
        let mut idx = 0;
        for &xi in &x[..self.n] {
            let pos = ((xi + self.half_width) / h).floor();
            if pos < T::zero() || pos >= count(self.points) {
                return None;
            }
            idx = idx * self.points + pos.to_usize()?;
        }
        Some(idx)
    }
}

/// Test-function families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum GeneratorId {
    /// `exp(-pi |x|^2)`, its own Fourier transform.
    Gaussian,
    /// `max(0, 1 - |x|)`.
    Tent,
    /// Indicator of the open ball of the given radius.
    IndicatorBall { radius: f64 },
    /// Indicator of the cube `[lo, hi)^n`.
    IndicatorBox { lo: f64, hi: f64 },
    /// `|x|^{-a}` with `0 < a < n`, truncated by the box.
    PowerLaw { a: f64 },
    /// `log |x|`, truncated by the box.
    LogAbs,
    /// Random real trigonometric polynomial with integer modes `|k|_inf <= bandwidth`
    /// on the box period `2L`.
    TrigPoly { seed: u64, bandwidth: usize },
    /// Random signed sum of three Gaussian bumps.
    RandomMix { seed: u64 },
}

impl GeneratorId {
    pub fn validate<T: Scalar>(&self, spec: &GridSpec<T>) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidGenerator(msg));
        match *self {
            GeneratorId::IndicatorBall { radius } if !(radius > 0.0 && radius.is_finite()) => {
                bad(format!("ball radius {radius} must be positive"))
            }
            GeneratorId::IndicatorBox { lo, hi } if !(lo < hi && lo.is_finite() && hi.is_finite()) => {
                bad(format!("box [{lo}, {hi}) is empty"))
            }
            GeneratorId::PowerLaw { a } if !(a > 0.0 && a < spec.n as f64) => {
                bad(format!("power-law exponent {a} must lie in (0, {})", spec.n))
            }
            GeneratorId::TrigPoly { bandwidth, .. } if bandwidth > spec.points / 4 => bad(format!(
                "bandwidth {bandwidth} exceeds N/4 = {}",
                spec.points / 4
            )),
            _ => Ok(()),
        }
    }

    /// Radius of a ball containing the (effective) support, for families that
    /// decay; `None` for families that fill the box.
    pub fn support_radius(&self, n: usize) -> Option<f64> {
        let root_n = (n as f64).sqrt();
        match *self {
            GeneratorId::Gaussian => Some(GAUSSIAN_EFFECTIVE_RADIUS),
            GeneratorId::Tent => Some(1.0),
            GeneratorId::IndicatorBall { radius } => Some(radius),
            GeneratorId::IndicatorBox { lo, hi } => Some(lo.abs().max(hi.abs()) * root_n),
            GeneratorId::RandomMix { seed } => Some(
                mix_bumps(seed, n)
                    .iter()
                    .map(|b| {
                        let c = b.center.iter().map(|c| c * c).sum::<f64>().sqrt();
                        c + GAUSSIAN_EFFECTIVE_RADIUS * b.width
                    })
                    .fold(0.0, f64::max),
            ),
            GeneratorId::PowerLaw { .. } | GeneratorId::LogAbs | GeneratorId::TrigPoly { .. } => {
                None
            }
        }
    }
}

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorId::Gaussian => write!(f, "gaussian"),
            GeneratorId::Tent => write!(f, "tent"),
            GeneratorId::IndicatorBall { radius } => write!(f, "indicator-ball({radius})"),
            GeneratorId::IndicatorBox { lo, hi } => write!(f, "indicator-box({lo},{hi})"),
            GeneratorId::PowerLaw { a } => write!(f, "power-law({a})"),
            GeneratorId::LogAbs => write!(f, "log-abs"),
            GeneratorId::TrigPoly { seed, bandwidth } => write!(f, "trig-poly({seed},{bandwidth})"),
            GeneratorId::RandomMix { seed } => write!(f, "random-mix({seed})"),
        }
    }
}

impl FromStr for GeneratorId {
    type Err = Error;

    /// Parses the `Display` form, e.g. `power-law(1.5)` or `trig-poly(7,4)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(open) if s.ends_with(')') => (&s[..open], Some(&s[open + 1..s.len() - 1])),
            Some(_) => return Err(Error::InvalidGenerator(format!("malformed family `{s}`"))),
            None => (s, None),
        };
        let args: Vec<&str> = args
            .map(|a| a.split(',').map(str::trim).collect())
            .unwrap_or_default();
        let float = |i: usize| -> Result<f64> {
            args.get(i)
                .ok_or_else(|| Error::InvalidGenerator(format!("`{name}` needs argument {}", i + 1)))?
                .parse()
                .map_err(|_| Error::InvalidGenerator(format!("bad number in `{s}`")))
        };
        let int = |i: usize| -> Result<u64> {
            args.get(i)
                .ok_or_else(|| Error::InvalidGenerator(format!("`{name}` needs argument {}", i + 1)))?
                .parse()
                .map_err(|_| Error::InvalidGenerator(format!("bad integer in `{s}`")))
        };
        let arity = |k: usize| -> Result<()> {
            if args.len() == k {
                Ok(())
            } else {
                Err(Error::InvalidGenerator(format!(
                    "`{name}` takes {k} argument(s), got {}",
                    args.len()
                )))
            }
        };
        let id = match name {
            "gaussian" => {
                arity(0)?;
                GeneratorId::Gaussian
            }
            "tent" => {
                arity(0)?;
                GeneratorId::Tent
            }
            "log-abs" => {
                arity(0)?;
                GeneratorId::LogAbs
            }
            "indicator-ball" => {
                arity(1)?;
                GeneratorId::IndicatorBall { radius: float(0)? }
            }
            "indicator-box" => {
                arity(2)?;
                GeneratorId::IndicatorBox {
                    lo: float(0)?,
                    hi: float(1)?,
                }
            }
            "power-law" => {
                arity(1)?;
                GeneratorId::PowerLaw { a: float(0)? }
            }
            "trig-poly" => {
                arity(2)?;
                GeneratorId::TrigPoly {
                    seed: int(0)?,
                    bandwidth: int(1)? as usize,
                }
            }
            "random-mix" => {
                arity(1)?;
                GeneratorId::RandomMix { seed: int(0)? }
            }
            other => return Err(Error::InvalidGenerator(format!("unknown family `{other}`"))),
        };
        Ok(id)
    }
}

/// A family plus the transformations applied to it: amplitude, dilation
/// `D_h f(x) = h^{-n} f(x/h)` and an optional sharp spectral cutoff.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Generator<T> {
    #[serde(flatten)]
    pub id: GeneratorId,
    pub dilation: T,
    pub amplitude: T,
    pub band_limit: Option<T>,
}

impl<T: Scalar> Generator<T> {
    pub fn plain(id: GeneratorId) -> Self {
        Self {
            id,
            dilation: T::one(),
            amplitude: T::one(),
            band_limit: None,
        }
    }

    /// Effective support radius after dilation.
    pub fn support_radius(&self, n: usize) -> Option<T> {
        self.id
            .support_radius(n)
            .map(|r| lit::<T>(r) * self.dilation)
    }
}

struct Bump {
    center: [f64; MAX_DIM],
    width: f64,
    amplitude: f64,
}

fn mix_bumps(seed: u64, n: usize) -> Vec<Bump> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..3)
        .map(|_| {
            let mut center = [0.0; MAX_DIM];
            for c in center.iter_mut().take(n) {
                *c = rng.random_range(-0.5..0.5);
            }
            let width = rng.random_range(0.6..1.2);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let amplitude = sign * rng.random_range(0.2..1.0);
            Bump {
                center,
                width,
                amplitude,
            }
        })
        .collect()
}

/// Pointwise evaluator for a family on a given grid (trig-poly coefficients
/// depend on the box period).
enum Evaluator<T> {
    Gaussian,
    Tent,
    Ball(T),
    Cube(T, T),
    Power(T),
    Log,
    Trig {
        bandwidth: usize,
        /// Complex coefficients `(re, im)` over `[-B, B]^n`, row-major.
        coeffs: Vec<(T, T)>,
        /// `pi / L`.
        base: T,
    },
    Mix(Vec<Bump>),
}

impl<T: Scalar> Evaluator<T> {
    fn new(id: &GeneratorId, spec: &GridSpec<T>) -> Self {
        match *id {
            GeneratorId::Gaussian => Evaluator::Gaussian,
            GeneratorId::Tent => Evaluator::Tent,
            GeneratorId::IndicatorBall { radius } => Evaluator::Ball(lit(radius)),
            GeneratorId::IndicatorBox { lo, hi } => Evaluator::Cube(lit(lo), lit(hi)),
            GeneratorId::PowerLaw { a } => Evaluator::Power(lit(a)),
            GeneratorId::LogAbs => Evaluator::Log,
            GeneratorId::TrigPoly { seed, bandwidth } => {
                let terms = (2 * bandwidth + 1).pow(spec.n as u32);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let norm = 1.0 / (terms as f64).sqrt();
                let coeffs = (0..terms)
                    .map(|_| {
                        let re: f64 = rng.random_range(-1.0..1.0);
                        let im: f64 = rng.random_range(-1.0..1.0);
                        (lit(re * norm), lit(im * norm))
                    })
                    .collect();
                Evaluator::Trig {
                    bandwidth,
                    coeffs,
                    base: T::PI() / spec.half_width,
                }
            }
            GeneratorId::RandomMix { seed } => Evaluator::Mix(mix_bumps(seed, spec.n)),
        }
    }

    fn eval(&self, x: &[T]) -> T {
        let r2: T = x.iter().map(|&v| v * v).sum();
        match self {
            Evaluator::Gaussian => (-T::PI() * r2).exp(),
            Evaluator::Tent => (T::one() - r2.sqrt()).max(T::zero()),
            Evaluator::Ball(radius) => indicator(r2 < *radius * *radius),
            Evaluator::Cube(lo, hi) => indicator(x.iter().all(|v| v >= lo && v < hi)),
            Evaluator::Power(a) => r2.powf(-*a / lit(2.0)),
            Evaluator::Log => r2.ln() / lit(2.0),
            Evaluator::Trig {
                bandwidth,
                coeffs,
                base,
            } => {
                let b = *bandwidth;
                let width = 2 * b + 1;
                // per-axis phases e^{i pi k x / L}
                let mut phases = Vec::with_capacity(x.len() * width);
                for &xi in x {
                    for k in 0..width {
                        let angle = *base * count::<T>(k) * xi - *base * count::<T>(b) * xi;
                        phases.push((angle.cos(), angle.sin()));
                    }
                }
                let mut total = T::zero();
                for (flat, &(cr, ci)) in coeffs.iter().enumerate() {
                    let (mut pr, mut pi) = (T::one(), T::zero());
                    let mut rest = flat;
                    for axis in (0..x.len()).rev() {
                        let (er, ei) = phases[axis * width + rest % width];
                        rest /= width;
                        let next = pr * er - pi * ei;
                        pi = pr * ei + pi * er;
                        pr = next;
                    }
                    total = total + cr * pr - ci * pi;
                }
                total
            }
            Evaluator::Mix(bumps) => bumps
                .iter()
                .map(|b| {
                    let d2: T = x
                        .iter()
                        .zip(b.center.iter())
                        .map(|(&v, &c)| (v - lit(c)) * (v - lit(c)))
                        .sum();
                    lit::<T>(b.amplitude) * (-T::PI() * d2 / lit(b.width * b.width)).exp()
                })
                .sum(),
        }
    }
}

fn indicator<T: Scalar>(inside: bool) -> T {
    if inside {
        T::one()
    } else {
        T::zero()
    }
}

/// Real samples of a function on a [`GridSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GridFunction<T> {
    pub spec: GridSpec<T>,
    pub generator: Option<Generator<T>>,
    pub values: Vec<T>,
}

impl<T: Scalar> GridFunction<T> {
    /// Wraps raw samples; no generator is attached.
    pub fn from_values(spec: GridSpec<T>, values: Vec<T>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a grid of {} points",
                values.len(),
                spec.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidValue(format!("non-finite sample at index {bad}")));
        }
        Ok(Self {
            spec,
            generator: None,
            values,
        })
    }

    pub fn zeros(spec: GridSpec<T>) -> Self {
        Self {
            spec,
            generator: None,
            values: vec![T::zero(); spec.len()],
        }
    }

    /// Samples `f(x_k)` at every cell midpoint.
    pub fn from_fn(spec: GridSpec<T>, f: impl Fn(&[T]) -> T) -> Self {
        let values = (0..spec.len())
            .map(|idx| f(&spec.point(idx)[..spec.n]))
            .collect();
        Self {
            spec,
            generator: None,
            values,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(text)
            .map_err(|e| Error::InvalidValue(format!("malformed grid function JSON: {e}")))?;
        f.spec.validate()?;
        if let Some(g) = &f.generator {
            g.id.validate(&f.spec)?;
        }
        Self::from_values(f.spec, f.values).map(|mut out| {
            out.generator = f.generator;
            out
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("grid function serializes")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest absolute sample.
    pub fn sup(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Pointwise map; drops the generator.
    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            spec: self.spec,
            generator: None,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `c * f`, keeping the generator recipe in sync.
    pub fn scale(&self, c: T) -> Self {
        Self {
            spec: self.spec,
            generator: self.generator.clone().map(|mut g| {
                g.amplitude = g.amplitude * c;
                g
            }),
            values: self.values.iter().map(|&v| c * v).collect(),
        }
    }

    /// Pointwise `a f + b g`.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::MismatchedSpecs);
        }
        Ok(Self {
            spec: self.spec,
            generator: None,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&x, &y)| a * x + b * y)
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(T::one(), other, T::one())
    }

    /// Embeds the samples into the doubled box `[-2L, 2L)^n`, zero elsewhere.
    pub fn zero_pad(&self) -> Self {
        let big = self.spec.doubled();
        let offset = self.spec.points / 2;
        let mut values = vec![T::zero(); big.len()];
        for (idx, &v) in self.values.iter().enumerate() {
            let mut multi = self.spec.unravel(idx);
            for k in multi.iter_mut().take(self.spec.n) {
                *k += offset;
            }
            values[big.ravel(&multi)] = v;
        }
        Self {
            spec: big,
            generator: None,
            values,
        }
    }

    /// Radius of a centered ball containing the support; `None` when the
    /// attached family fills the box.
    pub fn support_radius(&self) -> Option<T> {
        if let Some(g) = &self.generator {
            return g.support_radius(self.spec.n);
        }
        let half_diag = self.spec.cell_width() * lit::<T>(self.spec.n as f64).sqrt() / lit(2.0);
        let r = self
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != T::zero())
            .map(|(idx, _)| {
                let x = self.spec.point(idx);
                x.iter().map(|&c| c * c).sum::<T>().sqrt() + half_diag
            })
            .fold(T::zero(), T::max);
        Some(r)
    }
}

/// Samples a generator on a grid.
pub fn sample<T: Scalar>(spec: GridSpec<T>, gen: &GeneratorId) -> Result<GridFunction<T>> {
    sample_recipe(spec, &Generator::plain(gen.clone()))
}

/// Samples a full recipe: `amplitude * D_dilation(family)`, then the
/// optional spectral cutoff.
pub fn sample_recipe<T: Scalar>(spec: GridSpec<T>, gen: &Generator<T>) -> Result<GridFunction<T>> {
    spec.validate()?;
    gen.id.validate(&spec)?;
    if !(gen.dilation > T::zero() && gen.dilation.is_finite()) {
        return Err(Error::InvalidGenerator(format!(
            "dilation {} must be positive",
            gen.dilation
        )));
    }
    let eval = Evaluator::new(&gen.id, &spec);
    let scale = gen.amplitude / gen.dilation.powi(spec.n as i32);
    let inv = T::one() / gen.dilation;
    let mut f = GridFunction::from_fn(spec, |x| {
        let mut y = [T::zero(); MAX_DIM];
        for (yi, &xi) in y.iter_mut().zip(x) {
            *yi = xi * inv;
        }
        scale * eval.eval(&y[..x.len()])
    });
    if let Some(bad) = f.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidValue(format!(
            "{} produced a non-finite sample at index {bad}",
            gen.id
        )));
    }
    if let Some(radius) = gen.band_limit {
        f = fourier::frequency_split(&f, radius)?.0;
    }
    f.generator = Some(gen.clone());
    Ok(f)
}

/// `L^p` norm by midpoint quadrature; `p = inf` gives the largest sample.
pub fn lp_quadrature<T: Scalar>(f: &GridFunction<T>, p: T) -> Result<T> {
    if !(p >= T::one()) {
        return Err(Error::InvalidExponent(format!("L^p needs p >= 1, got {p}")));
    }
    let sup = f.sup();
    if p.is_infinite() || sup == T::zero() {
        return Ok(sup);
    }
    // scaled by the sup to keep powers in range
    let sum: T = f.values.iter().map(|v| (v.abs() / sup).powf(p)).sum();
    Ok(sup * (sum * f.spec.cell_volume()).powf(p.recip()))
}

/// Dilation `D_h f(x) = h^{-n} f(x/h)` resampled on the same grid.
///
/// Generator-backed functions are re-evaluated exactly; bare samples use
/// nearest-cell lookup, which carries an `O(h)` positional error.
pub fn dilate<T: Scalar>(f: &GridFunction<T>, hfac: T) -> Result<GridFunction<T>> {
    if !(hfac > T::zero() && hfac.is_finite()) {
        return Err(Error::InvalidValue(format!("dilation factor {hfac} must be positive")));
    }
    if let Some(radius) = f.support_radius() {
        let scaled = radius * hfac;
        if scaled >= f.spec.half_width {
            return Err(Error::SupportEscape {
                radius: crate::scalar::to_f64(scaled),
                half_width: crate::scalar::to_f64(f.spec.half_width),
            });
        }
    }
    match &f.generator {
        Some(g) => {
            let mut next = g.clone();
            next.dilation = g.dilation * hfac;
            next.band_limit = g.band_limit.map(|r| r / hfac);
            sample_recipe(f.spec, &next)
        }
        None => {
            let spec = f.spec;
            let scale = hfac.powi(spec.n as i32).recip();
            let inv = hfac.recip();
            Ok(GridFunction::from_fn(spec, |x| {
                let mut y = [T::zero(); MAX_DIM];
                for (yi, &xi) in y.iter_mut().zip(x) {
                    *yi = xi * inv;
                }
                spec.locate(&y[..spec.n])
                    .map_or(T::zero(), |idx| scale * f.values[idx])
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec1(l: f64, n: usize) -> GridSpec<f64> {
        GridSpec::<f64>::new(1, l, n).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(GridSpec::<f64>::new(4, 1.0, 16).is_err());
        assert!(GridSpec::<f64>::new(1, 0.0, 16).is_err());
        assert!(GridSpec::<f64>::new(1, 1.0, 12).is_err());
        assert!(GridSpec::<f64>::new(1, 1.0, 4).is_err());
        let s = GridSpec::<f64>::new(2, 2.0, 8).unwrap();
        assert_eq!(s.len(), 64);
        assert_relative_eq!(s.cell_width(), 0.5);
        assert_relative_eq!(s.cell_volume(), 0.25);
        assert_relative_eq!(s.midpoint(0), -1.75);
    }

    #[test]
    fn ravel_round_trip() {
        let s = GridSpec::<f64>::new(3, 1.0, 8).unwrap();
        for idx in [0, 1, 9, 100, 511] {
            assert_eq!(s.ravel(&s.unravel(idx)), idx);
        }
        assert_eq!(s.locate(&s.point(77)), Some(77));
        assert_eq!(s.locate(&[1.5, 0.0, 0.0]), None);
    }

    #[test]
    fn gaussian_has_unit_mass() {
        let f = sample(spec1(8.0, 256), &GeneratorId::Gaussian).unwrap();
        assert!((lp_quadrature(&f, 1.0).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn tent_mass_is_one() {
        let f = sample(spec1(2.0, 64), &GeneratorId::Tent).unwrap();
        assert!((lp_quadrature(&f, 1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_bandwidth_trig_poly_is_constant() {
        let s = GridSpec::<f64>::new(2, 1.0, 16).unwrap();
        let f = sample(s, &GeneratorId::TrigPoly { seed: 3, bandwidth: 0 }).unwrap();
        let first = f.values[0];
        assert!(f.values.iter().all(|&v| (v - first).abs() < 1e-15));
    }

    #[test]
    fn lp_examples() {
        let box01 = GeneratorId::IndicatorBox { lo: 0.0, hi: 1.0 };
        let f = sample(spec1(2.0, 64), &box01).unwrap();
        assert_relative_eq!(lp_quadrature(&f, 3.0).unwrap(), 1.0, epsilon = 1e-14);
        let tent = sample(spec1(2.0, 256), &GeneratorId::Tent).unwrap();
        assert!((lp_quadrature(&tent, 2.0).unwrap() - (2.0f64 / 3.0).sqrt()).abs() < 1e-3);
        let g = sample(spec1(8.0, 256), &GeneratorId::Gaussian).unwrap();
        assert!((lp_quadrature(&g, 2.0).unwrap() - 2f64.powf(-0.25)).abs() < 1e-6);
        assert_eq!(lp_quadrature(&g, f64::INFINITY).unwrap(), g.sup());
        assert!(lp_quadrature(&g, 0.5).is_err());
    }

    #[test]
    fn generator_validation() {
        let s = GridSpec::<f64>::new(2, 1.0, 16).unwrap();
        assert!(sample(s, &GeneratorId::PowerLaw { a: 2.0 }).is_err());
        assert!(sample(s, &GeneratorId::PowerLaw { a: 1.0 }).is_ok());
        assert!(sample(s, &GeneratorId::TrigPoly { seed: 0, bandwidth: 5 }).is_err());
        assert!(sample(s, &GeneratorId::IndicatorBall { radius: -1.0 }).is_err());
    }

    #[test]
    fn singular_families_are_finite_at_midpoints() {
        let s = GridSpec::<f64>::new(2, 1.0, 64).unwrap();
        for id in [GeneratorId::PowerLaw { a: 1.5 }, GeneratorId::LogAbs] {
            let f = sample(s, &id).unwrap();
            assert!(f.values.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn family_ids_round_trip_through_text() {
        let ids = [
            GeneratorId::Gaussian,
            GeneratorId::Tent,
            GeneratorId::IndicatorBall { radius: 0.5 },
            GeneratorId::IndicatorBox { lo: -0.5, hi: 0.5 },
            GeneratorId::PowerLaw { a: 1.5 },
            GeneratorId::LogAbs,
            GeneratorId::TrigPoly { seed: 7, bandwidth: 4 },
            GeneratorId::RandomMix { seed: 11 },
        ];
        for id in ids {
            assert_eq!(id.to_string().parse::<GeneratorId>().unwrap(), id);
        }
        assert!("gaussian(1)".parse::<GeneratorId>().is_err());
        assert!("wavelet".parse::<GeneratorId>().is_err());
    }

    #[test]
    fn identity_dilation() {
        let f = sample(spec1(4.0, 64), &GeneratorId::Tent).unwrap();
        assert_eq!(dilate(&f, 1.0).unwrap().values, f.values);
        let raw = GridFunction::from_values(f.spec, f.values.clone()).unwrap();
        assert_eq!(dilate(&raw, 1.0).unwrap().values, f.values);
    }

    #[test]
    fn dilation_scales_norms() {
        let s = GridSpec::<f64>::new(2, 4.0, 128).unwrap();
        let f = sample(s, &GeneratorId::Gaussian).unwrap();
        for hfac in [0.5, 1.2] {
            let d = dilate(&f, hfac).unwrap();
            let l1 = lp_quadrature(&d, 1.0).unwrap() / lp_quadrature(&f, 1.0).unwrap();
            assert!((l1 - 1.0).abs() < 1e-2);
            let l2 = lp_quadrature(&d, 2.0).unwrap() / lp_quadrature(&f, 2.0).unwrap();
            assert!((l2 / hfac.powf(-1.0) - 1.0).abs() < 1e-2);
        }
    }

    #[test]
    fn dilation_errors() {
        let f = sample(spec1(2.0, 64), &GeneratorId::Tent).unwrap();
        assert!(matches!(dilate(&f, 2.5), Err(Error::SupportEscape { .. })));
        assert!(dilate(&f, 0.0).is_err());
        assert!(dilate(&f, -1.0).is_err());
    }

    #[test]
    fn nearest_lookup_dilation_preserves_mass_roughly() {
        let f = sample(spec1(4.0, 256), &GeneratorId::Tent).unwrap();
        let raw = GridFunction::from_values(f.spec, f.values.clone()).unwrap();
        let d = dilate(&raw, 2.0).unwrap();
        let mass = lp_quadrature(&d, 1.0).unwrap();
        assert!((mass - 1.0).abs() < 2.0 * f.spec.cell_width());
    }

    #[test]
    fn json_round_trip() {
        let s = GridSpec::<f64>::new(1, 2.0, 8).unwrap();
        let f = sample(s, &GeneratorId::RandomMix { seed: 4 }).unwrap();
        let text = f.to_json();
        assert!(text.contains("\"L\":2.0"));
        assert!(text.contains("\"family\":\"random-mix\""));
        assert_eq!(GridFunction::<f64>::from_json(&text).unwrap(), f);
        assert!(GridFunction::<f64>::from_json("{\"spec\":{}}").is_err());
    }

    #[test]
    fn zero_pad_places_samples_in_center() {
        let s = spec1(1.0, 8);
        let f = sample(s, &GeneratorId::Tent).unwrap();
        let p = f.zero_pad();
        assert_eq!(p.spec.points, 16);
        assert_eq!(&p.values[4..12], &f.values[..]);
        assert_relative_eq!(p.spec.midpoint(4), s.midpoint(0));
    }

    #[test]
    fn works_in_single_precision() {
        let s = GridSpec::<f32>::new(1, 8.0, 256).unwrap();
        let f = sample(s, &GeneratorId::Gaussian).unwrap();
        assert!((lp_quadrature(&f, 1.0f32).unwrap() - 1.0).abs() < 1e-5);
    }
}
