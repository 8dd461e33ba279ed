//! Dyadic cubes: mean oscillation, the dyadic maximal function, the
//! Calderón–Zygmund stopping-time decomposition and John–Nirenberg decay.
//!
//! A cube of level `l` is one of the `2^{ln}` pieces of the box obtained by
//! halving every side `l` times; it covers `(N / 2^l)^n` whole cells. Cube
//! sums are kept in a pyramid where every parent is the pairwise sum of its
//! `2^n` children. Rounding is monotone, so for nonnegative data a child sum
//! never exceeds its parent sum, and because cell counts are powers of two
//! every average is an exact quotient. The decomposition invariants therefore
//! hold without tolerance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec, MAX_DIM};
use crate::report::InequalityReport;
use crate::scalar::{count, lit, to_f64, Scalar};
use crate::tolerance;

/// Dyadic sub-cube of the sampling box.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DyadicCube {
    pub level: u32,
    /// Position among the `2^level` cubes along each axis.
    pub corner: Vec<usize>,
}

impl DyadicCube {
    /// The whole box.
    pub fn root(n: usize) -> Self {
        Self {
            level: 0,
            corner: vec![0; n],
        }
    }

    pub fn new(level: u32, corner: Vec<usize>) -> Self {
        Self { level, corner }
    }

    /// Side length `2L 2^{-level}`.
    pub fn side<T: Scalar>(&self, spec: &GridSpec<T>) -> T {
        lit::<T>(2.0) * spec.half_width / count::<T>(1 << self.level)
    }

    pub fn volume<T: Scalar>(&self, spec: &GridSpec<T>) -> T {
        self.side(spec).powi(spec.n as i32)
    }

    /// Cells per axis.
    pub fn cells_per_side<T: Scalar>(&self, spec: &GridSpec<T>) -> usize {
        spec.points >> self.level
    }

    /// Fails unless the cube is a union of whole cells of `spec`.
    pub fn check_aligned<T: Scalar>(&self, spec: &GridSpec<T>) -> Result<()> {
        let per_axis = 1usize.checked_shl(self.level).unwrap_or(0);
        let fits = per_axis != 0
            && per_axis <= spec.points
            && self.corner.len() == spec.n
            && self.corner.iter().all(|&c| c < per_axis);
        if fits {
            Ok(())
        } else {
            Err(Error::UnalignedCube {
                level: self.level,
                points: spec.points,
            })
        }
    }

    pub fn children(&self) -> Vec<DyadicCube> {
        let n = self.corner.len();
        (0..1usize << n)
            .map(|bits| DyadicCube {
                level: self.level + 1,
                corner: (0..n)
                    .map(|a| 2 * self.corner[a] + ((bits >> (n - 1 - a)) & 1))
                    .collect(),
            })
            .collect()
    }

    /// Whether `other` lies inside `self`.
    pub fn contains(&self, other: &DyadicCube) -> bool {
        other.level >= self.level
            && self
                .corner
                .iter()
                .zip(&other.corner)
                .all(|(&a, &b)| b >> (other.level - self.level) == a)
    }

    /// Cell indices covered by the cube, in row-major order.
    pub fn cells<T: Scalar>(&self, spec: &GridSpec<T>) -> Vec<usize> {
        let side = self.cells_per_side(spec);
        let n = spec.n;
        let total = side.pow(n as u32);
        let mut out = Vec::with_capacity(total);
        for offset in 0..total {
            let mut rest = offset;
            let mut multi = [0usize; MAX_DIM];
            for a in (0..n).rev() {
                multi[a] = self.corner[a] * side + rest % side;
                rest /= side;
            }
            out.push(spec.ravel(&multi));
        }
        out
    }

    /// Index of this cube among the cubes of its level.
    fn slot(&self) -> usize {
        let per_axis = 1usize << self.level;
        self.corner.iter().fold(0, |acc, &c| acc * per_axis + c)
    }
}

/// Finest level `log2 N`.
pub fn finest_level<T: Scalar>(spec: &GridSpec<T>) -> u32 {
    spec.points.trailing_zeros()
}

fn check_level<T: Scalar>(spec: &GridSpec<T>, max_level: u32) -> Result<()> {
    if max_level > finest_level(spec) {
        return Err(Error::Precondition(format!(
            "level {max_level} is finer than the grid (N = {})",
            spec.points
        )));
    }
    Ok(())
}

fn pairwise<T: Scalar>(xs: &mut [T]) -> T {
    let mut len = xs.len();
    while len > 1 {
        for i in 0..len / 2 {
            xs[i] = xs[2 * i] + xs[2 * i + 1];
        }
        len /= 2;
    }
    xs[0]
}

/// Sums `2^n` blocks of a `side^n` array into a `(side/2)^n` array.
fn coarsen<T: Scalar>(fine: &[T], n: usize, side: usize) -> Vec<T> {
    let half = side / 2;
    let parents = half.pow(n as u32);
    let mut kids = [T::zero(); 1 << MAX_DIM];
    let mut out = Vec::with_capacity(parents);
    for p in 0..parents {
        let mut pm = [0usize; MAX_DIM];
        let mut rest = p;
        for a in (0..n).rev() {
            pm[a] = rest % half;
            rest /= half;
        }
        for (c, kid) in kids.iter_mut().take(1 << n).enumerate() {
            let idx = (0..n).fold(0, |acc, a| acc * side + 2 * pm[a] + ((c >> (n - 1 - a)) & 1));
            *kid = fine[idx];
        }
        out.push(pairwise(&mut kids[..1 << n]));
    }
    out
}

/// Cube sums of some per-cell quantity at every level from `min_level` to
/// the finest.
#[derive(Clone, Debug)]
pub struct Pyramid<T> {
    spec: GridSpec<T>,
    min_level: u32,
    /// `levels[l - min_level]` holds the sums at level `l`.
    levels: Vec<Vec<T>>,
}

impl<T: Scalar> Pyramid<T> {
    pub fn build(spec: &GridSpec<T>, cells: Vec<T>, min_level: u32) -> Self {
        let finest = finest_level(spec);
        let mut levels = vec![cells];
        let mut side = spec.points;
        for _ in min_level..finest {
            let next = coarsen(levels.last().expect("non-empty"), spec.n, side);
            levels.push(next);
            side /= 2;
        }
        levels.reverse();
        Self {
            spec: *spec,
            min_level,
            levels,
        }
    }

    pub fn of_abs(f: &GridFunction<T>) -> Self {
        Self::build(&f.spec, f.values.iter().map(|v| v.abs()).collect(), 0)
    }

    pub fn of_values(f: &GridFunction<T>) -> Self {
        Self::build(&f.spec, f.values.clone(), 0)
    }

    pub fn sum(&self, cube: &DyadicCube) -> T {
        self.levels[(cube.level - self.min_level) as usize][cube.slot()]
    }

    /// Cells in a cube of this level.
    pub fn count(&self, level: u32) -> usize {
        (self.spec.points >> level).pow(self.spec.n as u32)
    }

    pub fn average(&self, cube: &DyadicCube) -> T {
        self.sum(cube) / count::<T>(self.count(cube.level))
    }

    fn level_slice(&self, level: u32) -> &[T] {
        &self.levels[(level - self.min_level) as usize]
    }
}

/// Slot of the level-`level` cube holding cell `idx`.
fn slot_of<T: Scalar>(spec: &GridSpec<T>, idx: usize, level: u32) -> usize {
    let multi = spec.unravel(idx);
    let shift = finest_level(spec) - level;
    let per_axis = 1usize << level;
    (0..spec.n).fold(0, |acc, a| acc * per_axis + (multi[a] >> shift))
}

/// Mean of the samples in `cube`.
pub fn cube_average<T: Scalar>(f: &GridFunction<T>, cube: &DyadicCube) -> Result<T> {
    cube.check_aligned(&f.spec)?;
    let cells: Vec<T> = cube.cells(&f.spec).into_iter().map(|i| f.values[i]).collect();
    let side = cube.cells_per_side(&f.spec);
    // sum through the same pairwise tree as the pyramid
    let sub = GridSpec { n: f.spec.n, half_width: f.spec.half_width, points: side };
    let sum = Pyramid::build(&sub, cells, 0).level_slice(0)[0];
    Ok(sum / count::<T>(side.pow(f.spec.n as u32)))
}

/// `max_Q (1/|Q|) int_Q |f - f_Q|` over dyadic cubes of level `<= max_level`.
///
/// A lower bound for the norm over all cubes.
pub fn bmo_norm<T: Scalar>(f: &GridFunction<T>, max_level: u32) -> Result<T> {
    check_level(&f.spec, max_level)?;
    let spec = f.spec;
    let signed = Pyramid::of_values(f);
    let sup = f.sup();
    let mut best = T::zero();
    for level in 0..=max_level {
        let cells = signed.count(level);
        let means: Vec<T> = signed
            .level_slice(level)
            .iter()
            // the true mean lies in [-sup, sup]; clamping removes rounding spill
            .map(|&s| (s / count::<T>(cells)).max(-sup).min(sup))
            .collect();
        let dev: Vec<T> = f
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| (v - means[slot_of(&spec, i, level)]).abs())
            .collect();
        let pyramid = Pyramid::build(&spec, dev, level);
        let top = pyramid
            .level_slice(level)
            .iter()
            .fold(T::zero(), |m, &s| m.max(s / count::<T>(cells)));
        best = best.max(top);
    }
    Ok(best)
}

/// Dyadic maximal function: at each cell, the largest `|f|`-average over
/// cubes of level `<= max_level` containing it.
pub fn maximal<T: Scalar>(f: &GridFunction<T>, max_level: u32) -> Result<GridFunction<T>> {
    check_level(&f.spec, max_level)?;
    let pyramid = Pyramid::of_abs(f);
    let values = (0..f.len())
        .map(|i| {
            (0..=max_level)
                .map(|l| pyramid.level_slice(l)[slot_of(&f.spec, i, l)] / count::<T>(pyramid.count(l)))
                .fold(T::zero(), T::max)
        })
        .collect();
    Ok(GridFunction {
        spec: f.spec,
        generator: None,
        values,
    })
}

/// A cube chosen by the stopping rule, with its `|f|`-average.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SelectedCube<T> {
    pub level: u32,
    pub corner: Vec<usize>,
    pub average: T,
}

impl<T> SelectedCube<T> {
    pub fn cube(&self) -> DyadicCube {
        DyadicCube::new(self.level, self.corner.clone())
    }
}

/// Output of [`cz_decompose`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CubeDecomposition<T> {
    #[serde(rename = "M")]
    pub threshold: T,
    pub root: DyadicCube,
    /// Sorted by level, then corner.
    pub selected: Vec<SelectedCube<T>>,
    /// Largest `|f|` over cells of the root outside every selected cube.
    pub residual_max: T,
}

/// Calderón–Zygmund decomposition of `|f|` on `root` at height `M`.
///
/// Cubes are halved until a child's `|f|`-average exceeds `M`; such a child
/// is selected and not refined further. Unselected single cells carry
/// `|f| <= M`.
pub fn cz_decompose<T: Scalar>(f: &GridFunction<T>, root: &DyadicCube, threshold: T) -> Result<CubeDecomposition<T>> {
    root.check_aligned(&f.spec)?;
    let pyramid = Pyramid::of_abs(f);
    let root_avg = pyramid.average(root);
    if !(threshold >= root_avg && threshold.is_finite()) {
        return Err(Error::Precondition(format!(
            "threshold {threshold} is below the root average {root_avg}"
        )));
    }
    let finest = finest_level(&f.spec);
    let mut selected = Vec::new();
    let mut residual = T::zero();
    if root.level == finest {
        residual = root_avg;
    }
    let mut stack = vec![root.clone()];
    while let Some(cube) = stack.pop() {
        if cube.level == finest {
            continue;
        }
        for child in cube.children() {
            let average = pyramid.average(&child);
            if average > threshold {
                selected.push(SelectedCube {
                    level: child.level,
                    corner: child.corner,
                    average,
                });
            } else if child.level == finest {
                residual = residual.max(average);
            } else {
                stack.push(child);
            }
        }
    }
    selected.sort_by(|a, b| (a.level, &a.corner).cmp(&(b.level, &b.corner)));
    Ok(CubeDecomposition {
        threshold,
        root: root.clone(),
        selected,
        residual_max: residual,
    })
}

impl<T: Scalar> CubeDecomposition<T> {
    /// Re-checks every invariant against `f`; returns the failures.
    pub fn verify(&self, f: &GridFunction<T>) -> Vec<String> {
        let mut bad = Vec::new();
        let m = self.threshold;
        let spec = &f.spec;
        let pyramid = Pyramid::of_abs(f);
        let upper = m * count::<T>(1 << spec.n);
        let mut covered = vec![false; f.len()];
        let mut total_cells = 0usize;
        for sel in &self.selected {
            let cube = sel.cube();
            if cube.check_aligned(spec).is_err() || !self.root.contains(&cube) || cube == self.root {
                bad.push(format!("cube {cube:?} is not a proper dyadic sub-cube of the root"));
                continue;
            }
            let avg = pyramid.average(&cube);
            if !(m < avg && avg <= upper) {
                bad.push(format!("average {avg} of {cube:?} outside ({m}, {upper}]"));
            }
            for i in cube.cells(spec) {
                if covered[i] {
                    bad.push(format!("cube {cube:?} overlaps another selected cube"));
                    break;
                }
                covered[i] = true;
            }
            total_cells += pyramid.count(cube.level);
        }
        // sum |Q_j| <= (1/M) int_root |f|, in units of one cell
        let mass = pyramid.sum(&self.root);
        if count::<T>(total_cells) * m > mass {
            bad.push(format!("selected volume {total_cells} cells exceeds mass/M = {}", mass / m));
        }
        let residual = self
            .root
            .cells(spec)
            .into_iter()
            .filter(|&i| !covered[i])
            .map(|i| f.values[i].abs())
            .fold(T::zero(), T::max);
        if residual > m {
            bad.push(format!("residual {residual} exceeds {m}"));
        }
        if residual != self.residual_max {
            bad.push(format!("recorded residual {} differs from {residual}", self.residual_max));
        }
        bad
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("decomposition serializes")
    }
}

/// `bmo (1 + k/2)` for `k = 0..=16`.
pub fn default_alphas<T: Scalar>(bmo: T) -> Vec<T> {
    (0..=16).map(|k| bmo * (T::one() + count::<T>(k) / lit(2.0))).collect()
}

/// `m(alpha) = |{x in Q : |f - f_Q| > alpha}|` at each `alpha`.
pub fn oscillation_measures<T: Scalar>(f: &GridFunction<T>, cube: &DyadicCube, alphas: &[T]) -> Result<Vec<T>> {
    let mean = cube_average(f, cube)?;
    let vol = f.spec.cell_volume();
    let mut dev: Vec<T> = cube.cells(&f.spec).into_iter().map(|i| (f.values[i] - mean).abs()).collect();
    dev.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    Ok(alphas
        .iter()
        .map(|&a| count::<T>(dev.len() - dev.partition_point(|&d| d <= a)) * vol)
        .collect())
}

/// Exponential decay of `m(alpha)` on `cube`.
///
/// Fits `log m(alpha) = intercept + slope alpha` by least squares over the
/// `alpha` with `m(alpha) > 0`. The report's `lhs` is the empirical constant
/// `max m(alpha) / (|Q| exp(-alpha / (2^n e b)))`, `b` the dyadic BMO norm,
/// and the fit lands in `extras`. A non-negative slope or an `R^2` below
/// [`tolerance::JN_MIN_R_SQUARED`] is flagged.
pub fn jn_decay_check<T: Scalar>(f: &GridFunction<T>, cube: &DyadicCube, alphas: &[T]) -> Result<InequalityReport<T>> {
    cube.check_aligned(&f.spec)?;
    let bmo = bmo_norm(f, finest_level(&f.spec))?;
    if bmo == T::zero() {
        return Err(Error::Degenerate("function has zero mean oscillation".into()));
    }
    let measures = oscillation_measures(f, cube, alphas)?;
    let points: Vec<(T, T)> = alphas
        .iter()
        .zip(&measures)
        .filter(|(_, &m)| m > T::zero())
        .map(|(&a, &m)| (a, m.ln()))
        .collect();
    if points.len() < 3 {
        return Err(Error::Degenerate(format!(
            "only {} thresholds with positive measure",
            points.len()
        )));
    }
    let k = count::<T>(points.len());
    let mean_a = points.iter().map(|p| p.0).sum::<T>() / k;
    let mean_y = points.iter().map(|p| p.1).sum::<T>() / k;
    let sxx: T = points.iter().map(|p| (p.0 - mean_a).powi(2)).sum();
    let sxy: T = points.iter().map(|p| (p.0 - mean_a) * (p.1 - mean_y)).sum();
    let syy: T = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    if sxx == T::zero() {
        return Err(Error::Degenerate("all thresholds coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_a;
    let residual: T = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy == T::zero() { T::one() } else { T::one() - residual / syy };
    let volume = cube.volume(&f.spec);
    let rate = (count::<T>(1 << f.spec.n) * T::E() * bmo).recip();
    let constant = alphas
        .iter()
        .zip(&measures)
        .map(|(&a, &m)| m / (volume * (-rate * a).exp()))
        .fold(T::zero(), T::max);
    let mut rep = InequalityReport::new("john-nirenberg", constant, T::one())
        .on(f)
        .with_param("level", cube.level as f64)
        .with_extra("slope", slope)
        .with_extra("intercept", intercept)
        .with_extra("r_squared", r_squared)
        .with_extra("bmo", bmo)
        .with_extra("points", k);
    if slope >= T::zero() {
        rep.violate(format!("measure does not decay (slope {slope})"));
    }
    if r_squared < lit(tolerance::JN_MIN_R_SQUARED) {
        rep.violate(format!("log-linear fit is poor (R^2 = {r_squared})"));
    }
    Ok(rep)
}

/// `||f||_BMO <= C ||f||_{H^{n/2}}` with the dyadic norm at full depth.
pub fn hn2_bmo_check<T: Scalar>(f: &GridFunction<T>) -> Result<InequalityReport<T>> {
    let s = count::<T>(f.spec.n) / lit(2.0);
    let lhs = bmo_norm(f, finest_level(&f.spec))?;
    let rhs = crate::fourier::sobolev_norm(f, s)?;
    Ok(InequalityReport::new("hn2-bmo", lhs, rhs).on(f).with_param("s", to_f64(s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{dilate, sample, GeneratorId};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(n: usize, l: f64, pts: usize) -> GridSpec<f64> {
        GridSpec::new(n, l, pts).unwrap()
    }

    /// Samples that are multiples of `2^-20`, so every sum is exact.
    fn dyadic(n: usize, pts: usize, seed: u64) -> GridFunction<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = spec(n, 1.0, pts);
        let values = (0..s.len()).map(|_| rng.random_range(-1i32 << 20..1 << 20) as f64 / (1 << 20) as f64).collect();
        GridFunction::from_values(s, values).unwrap()
    }

    #[test]
    fn cube_geometry() {
        let s = spec(2, 1.0, 8);
        let c = DyadicCube::new(1, vec![1, 0]);
        assert_eq!(c.side(&s), 1.0);
        assert_eq!(c.cells(&s).len(), 16);
        assert_eq!(c.children().len(), 4);
        assert!(c.children().iter().all(|k| c.contains(k)));
        assert!(!c.contains(&DyadicCube::root(2)));
        assert!(DyadicCube::new(4, vec![0, 0]).check_aligned(&s).is_err());
        assert!(DyadicCube::new(1, vec![2, 0]).check_aligned(&s).is_err());
        assert!(DyadicCube::new(1, vec![0]).check_aligned(&s).is_err());
        let mut all: Vec<usize> = c.children().iter().flat_map(|k| k.cells(&s)).collect();
        all.sort();
        let mut direct = c.cells(&s);
        direct.sort();
        assert_eq!(all, direct);
    }

    #[test]
    fn averages() {
        let s = spec(1, 1.0, 64);
        let c = GridFunction::from_fn(s, |_| 2.5);
        assert_eq!(cube_average(&c, &DyadicCube::root(1)).unwrap(), 2.5);
        let tent = sample(s, &GeneratorId::Tent).unwrap();
        assert!((cube_average(&tent, &DyadicCube::root(1)).unwrap() - 0.5).abs() < 1e-12);
        let f = dyadic(2, 16, 1);
        let parent = DyadicCube::new(1, vec![1, 1]);
        let kids: f64 = parent.children().iter().map(|k| cube_average(&f, k).unwrap()).sum::<f64>() / 4.0;
        assert_eq!(kids, cube_average(&f, &parent).unwrap());
        assert!(cube_average(&f, &DyadicCube::new(5, vec![0, 0])).is_err());
    }

    #[test]
    fn bmo_basics() {
        let s = spec(2, 1.0, 32);
        let c = GridFunction::from_fn(s, |_| 0.3);
        assert_eq!(bmo_norm(&c, 5).unwrap(), 0.0);
        let f = dyadic(2, 32, 2);
        let b = bmo_norm(&f, 5).unwrap();
        assert!(b > 0.0 && b <= 2.0 * f.sup());
        assert_eq!(bmo_norm(&f.map(|v| v + 3.0), 5).unwrap(), b);
        assert_eq!(bmo_norm(&f.scale(-4.0), 5).unwrap(), 4.0 * b);
        let g = dyadic(2, 32, 3);
        assert!(bmo_norm(&f.add(&g).unwrap(), 5).unwrap() <= b + bmo_norm(&g, 5).unwrap());
        assert!(bmo_norm(&f, 6).is_err());
        // two-level extremal case: mean oscillation 2 sup is attained
        let half = GridFunction::from_fn(spec(1, 1.0, 8), |x| if x[0] < 0.0 { -1.0 } else { 1.0 });
        assert_eq!(bmo_norm(&half, 0).unwrap(), 1.0);
    }

    #[test]
    fn log_is_bmo_but_unbounded() {
        let mut norms = Vec::new();
        let mut sups = Vec::new();
        for pts in [64, 128] {
            let f = sample(spec(2, 1.0, pts), &GeneratorId::LogAbs).unwrap();
            norms.push(bmo_norm(&f, finest_level(&f.spec)).unwrap());
            sups.push(f.sup());
        }
        assert!(sups[1] > sups[0] + 0.5);
        assert!(norms[1] / norms[0] < 1.3 && norms[0] / norms[1] < 1.3);
    }

    #[test]
    fn maximal_examples() {
        let s = spec(1, 1.0, 16);
        let c = GridFunction::from_fn(s, |_| -2.0);
        assert!(maximal(&c, 4).unwrap().values.iter().all(|&v| v == 2.0));
        let mut spike = GridFunction::zeros(s);
        spike.values[8] = 1.0;
        let m = maximal(&spike, 4).unwrap();
        // the smallest dyadic cube holding cells 8 and j has 2^k cells
        let expect = [1.0 / 16.0, 1.0 / 16.0, 1.0 / 16.0, 1.0 / 16.0, 1.0 / 16.0, 1.0 / 16.0, 1.0 / 16.0, 1.0 / 16.0, 1.0, 0.5, 0.25, 0.25, 0.125, 0.125, 0.125, 0.125];
        assert_eq!(m.values, expect);
        let f = dyadic(2, 16, 4);
        let mf = maximal(&f, 4).unwrap();
        assert!(f.values.iter().zip(&mf.values).all(|(a, b)| a.abs() <= *b));
        let g = f.map(|v| 1.5 * v.abs() + 0.1);
        let mg = maximal(&g, 4).unwrap();
        assert!(mf.values.iter().zip(&mg.values).all(|(a, b)| a <= b));
    }

    #[test]
    fn hand_traced_decomposition() {
        let s = spec(1, 1.0, 16);
        let f = GridFunction::from_fn(s, |x| if (0.0..0.25).contains(&x[0]) { 4.0 } else { 0.0 });
        let root = DyadicCube::new(1, vec![1]);
        let d = cz_decompose(&f, &root, 1.0).unwrap();
        assert_eq!(d.selected.len(), 1);
        assert_eq!(d.selected[0].cube(), DyadicCube::new(2, vec![2]));
        assert_eq!(d.selected[0].average, 2.0);
        assert_eq!(d.residual_max, 0.0);
        assert!(d.verify(&f).is_empty());
        let json = d.to_json();
        assert!(json.contains("\"M\":1.0") && json.contains("\"residual_max\":0.0"));
        let back: CubeDecomposition<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn constant_selects_nothing() {
        let s = spec(2, 1.0, 16);
        let f = GridFunction::from_fn(s, |_| 0.7);
        let d = cz_decompose(&f, &DyadicCube::root(2), 0.7).unwrap();
        assert!(d.selected.is_empty());
        assert_eq!(d.residual_max, 0.7);
        assert!(matches!(cz_decompose(&f, &DyadicCube::root(2), 0.5), Err(Error::Precondition(_))));
    }

    #[test]
    fn random_decompositions_verify() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..40 {
            let n = 1 + trial % 2;
            let s = spec(n, 1.0, 32);
            let f = sample(s, &GeneratorId::RandomMix { seed: trial as u64 }).unwrap();
            let gain = rng.random_range(1.0..20.0);
            let f = f.map(|v| v * v * gain);
            let root = DyadicCube::root(n);
            let avg = Pyramid::of_abs(&f).average(&root);
            let m = rng.random_range(avg..f.sup().max(avg * 1.01));
            let d = cz_decompose(&f, &root, m).unwrap();
            assert!(d.verify(&f).is_empty(), "{:?}", d.verify(&f));
        }
    }

    #[test]
    fn verify_catches_tampering() {
        let s = spec(1, 1.0, 16);
        let f = GridFunction::from_fn(s, |x| if (0.0..0.25).contains(&x[0]) { 4.0 } else { 0.0 });
        let mut d = cz_decompose(&f, &DyadicCube::new(1, vec![1]), 1.0).unwrap();
        d.selected.push(SelectedCube { level: 3, corner: vec![4], average: 4.0 });
        assert!(!d.verify(&f).is_empty());
        d.selected.clear();
        assert!(!d.verify(&f).is_empty());
    }

    #[test]
    fn john_nirenberg_on_log() {
        let f = sample(spec(2, 1.0, 128), &GeneratorId::LogAbs).unwrap();
        let alphas: Vec<f64> = (0..13).map(|k| 0.5 + 0.25 * k as f64).collect();
        let rep = jn_decay_check(&f, &DyadicCube::root(2), &alphas).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.extras["slope"] < 0.0 && rep.extras["r_squared"] >= 0.9);
    }

    #[test]
    fn john_nirenberg_degenerate_and_bounded() {
        let s = spec(2, 1.0, 16);
        let c = GridFunction::from_fn(s, |_| 1.0);
        assert!(matches!(jn_decay_check(&c, &DyadicCube::root(2), &[0.1, 0.2, 0.3]), Err(Error::Degenerate(_))));
        let f = dyadic(2, 16, 5);
        let m = oscillation_measures(&f, &DyadicCube::root(2), &[2.0 * f.sup()]).unwrap();
        assert_eq!(m, vec![0.0]);
    }

    #[test]
    fn hn2_ratio_and_dilation() {
        let s = spec(2, 4.0, 128);
        let g = sample(s, &GeneratorId::Gaussian).unwrap();
        let base = hn2_bmo_check(&g).unwrap();
        assert!(base.ratio.is_finite() && base.ratio > 0.0);
        let wide = hn2_bmo_check(&dilate(&g, 1.25).unwrap()).unwrap();
        assert!((wide.ratio / base.ratio - 1.0).abs() < 0.05, "{} vs {}", wide.ratio, base.ratio);
        let c = GridFunction::from_fn(s, |_| 0.0);
        assert!(hn2_bmo_check(&c).unwrap().degenerate);
    }
}
