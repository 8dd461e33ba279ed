//! Invariant suite behind `harmonic selftest`.

use std::io::Write;

use harmonic_core::bmo::{self, DyadicCube};
use harmonic_core::inequality::{self, dilation_drift, solve_theta};
use harmonic_core::measure::{self, interp_bound_check};
use harmonic_core::tolerance as tol;
use harmonic_core::{convolve, fourier, lp_quadrature, sample, sample_recipe, Generator, GeneratorId, GridFunction64, GridSpec64};

type Check = std::result::Result<String, String>;

fn spec(n: usize, l: f64, points: usize) -> GridSpec64 {
    GridSpec64::new(n, l, points).expect("built-in grid is valid")
}

fn shaped(spec: GridSpec64, id: GeneratorId, dilation: f64) -> Result<GridFunction64, String> {
    let mut g = Generator::plain(id);
    g.dilation = dilation;
    sample_recipe(spec, &g).map_err(|e| e.to_string())
}

fn corpus(n: usize) -> Result<Vec<GridFunction64>, String> {
    let s = spec(n, 4.0, 128);
    let mut ids = vec![
        GeneratorId::Gaussian,
        GeneratorId::Tent,
        GeneratorId::IndicatorBall { radius: 1.0 },
        GeneratorId::PowerLaw { a: n as f64 / 3.0 },
        GeneratorId::LogAbs,
    ];
    ids.extend((1..=4).map(|seed| GeneratorId::RandomMix { seed }));
    ids.into_iter().map(|id| sample(s, &id).map_err(|e| e.to_string())).collect()
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn distribution_checks() -> Check {
    let mut worst_cake = 0.0f64;
    let mut worst_rearr = 0.0f64;
    for n in [1, 2] {
        for f in corpus(n)? {
            for p in [1.0, 1.5, 2.0, 4.0] {
                let lp = lp_quadrature(&f, p).map_err(|e| e.to_string())?;
                let cake = measure::layer_cake_norm(&f, p).map_err(|e| e.to_string())?;
                worst_cake = worst_cake.max((cake - lp.powf(p)).abs() / lp.powf(p));
                let weak = measure::weak_norm(&f, p).map_err(|e| e.to_string())?;
                if weak > lp {
                    return Err(format!("weak norm {weak} exceeds L^{p} norm {lp}"));
                }
                let star = measure::rearrange(&f).power_integral(p);
                worst_rearr = worst_rearr.max((star - lp.powf(p)).abs() / lp.powf(p));
            }
        }
    }
    ensure(
        worst_cake <= tol::LAYER_CAKE_REL && worst_rearr <= tol::REARRANGEMENT_REL,
        format!("layer-cake {worst_cake:.2e}, rearrangement {worst_rearr:.2e}"),
    )
}

fn interpolation_checks() -> Check {
    let mut worst = 0.0f64;
    for n in [1, 2] {
        for f in corpus(n)? {
            for (p, r, q) in [(2.0, 3.0, 4.0), (1.5, 2.0, 6.0)] {
                let rep = interp_bound_check(&f, p, r, q).map_err(|e| e.to_string())?;
                worst = worst.max(rep.scaled_ratio());
            }
        }
    }
    ensure(worst <= 1.0 + tol::INTERP_SLACK, format!("max scaled ratio {worst:.6}"))
}

fn fourier_checks() -> Check {
    let s = spec(1, 8.0, 256);
    let g = sample(s, &GeneratorId::Gaussian).map_err(|e| e.to_string())?;
    let defect = fourier::plancherel_defect(&g);
    let spectrum = fourier::forward(&g);
    let fixed = (0..spectrum.coeffs.len())
        .map(|k| {
            let xi = spectrum.frequency(k)[0];
            (spectrum.coeffs[k].re - (-std::f64::consts::PI * xi * xi).exp()).abs().max(spectrum.coeffs[k].im.abs())
        })
        .fold(0.0, f64::max);
    ensure(
        defect <= tol::PLANCHEREL && fixed <= tol::GAUSSIAN_FIXED_POINT,
        format!("plancherel {defect:.2e}, gaussian fixed point {fixed:.2e}"),
    )
}

fn young_checks() -> Check {
    let s = spec(1, 4.0, 128);
    let ids = [GeneratorId::Gaussian, GeneratorId::Tent, GeneratorId::RandomMix { seed: 3 }];
    let mut worst = 0.0f64;
    let mut theorem = 0.0f64;
    for a in &ids {
        for b in &ids {
            let f = sample(s, a).map_err(|e| e.to_string())?;
            let g = sample(s, b).map_err(|e| e.to_string())?;
            for (p, q, r) in [(1.0, 1.0, 1.0), (2.0, 1.0, 2.0), (3.0, 2.0, 1.2)] {
                let rep = convolve::young_strong_check(&f, &g, p, q, r).map_err(|e| e.to_string())?;
                worst = worst.max(rep.ratio);
            }
            theorem = theorem.max(convolve::convolution_theorem_defect(&f, &g).map_err(|e| e.to_string())?);
        }
    }
    ensure(
        worst <= 1.0 + tol::YOUNG_SLACK && theorem <= tol::CONVOLUTION_THEOREM,
        format!("max Young ratio {worst:.6}, convolution theorem {theorem:.2e}"),
    )
}

fn cz_checks() -> Check {
    let mut cubes = 0;
    for n in [1, 2] {
        for f in corpus(n)? {
            let root = DyadicCube::root(n);
            let avg = bmo::cube_average(&f.map(f64::abs), &root).map_err(|e| e.to_string())?;
            for factor in [1.5, 4.0, 16.0] {
                let dec = bmo::cz_decompose(&f, &root, avg * factor).map_err(|e| e.to_string())?;
                let broken = dec.verify(&f);
                if let Some(msg) = broken.first() {
                    return Err(msg.clone());
                }
                cubes += dec.selected.len();
            }
        }
    }
    let s = spec(1, 1.0, 16);
    let hand = GridFunction64::from_fn(s, |x| if (0.0..0.25).contains(&x[0]) { 4.0 } else { 0.0 });
    let dec = bmo::cz_decompose(&hand, &DyadicCube::root(1), 1.0).map_err(|e| e.to_string())?;
    ensure(
        dec.selected.len() == 1 && dec.selected[0].average == 2.0,
        format!("{cubes} cubes selected, hand-traced example gives {} cube(s)", dec.selected.len()),
    )
}

fn bmo_checks() -> Check {
    let s = spec(2, 4.0, 64);
    let flat = GridFunction64::from_fn(s, |_| 3.0);
    let zero = bmo::bmo_norm(&flat, bmo::finest_level(&s)).map_err(|e| e.to_string())?;
    if zero != 0.0 {
        return Err(format!("constant has mean oscillation {zero}"));
    }
    for f in corpus(2)? {
        let b = bmo::bmo_norm(&f, bmo::finest_level(&f.spec)).map_err(|e| e.to_string())?;
        if b > 2.0 * f.sup() {
            return Err(format!("BMO norm {b} exceeds twice the sup {}", f.sup()));
        }
    }
    let f = sample(spec(2, 4.0, 128), &GeneratorId::LogAbs).map_err(|e| e.to_string())?;
    let b = bmo::bmo_norm(&f, bmo::finest_level(&f.spec)).map_err(|e| e.to_string())?;
    let jn = bmo::jn_decay_check(&f, &DyadicCube::root(2), &bmo::default_alphas(b)).map_err(|e| e.to_string())?;
    let r2 = jn.extras.get("r_squared").copied().unwrap_or(0.0);
    ensure(jn.passed(), format!("log|x| bmo {b:.4}, decay fit R^2 {r2:.4}"))
}

fn theta_checks() -> Check {
    let t = solve_theta::<f64>(2, 4.0, 2.0, 1.0).map_err(|e| e.to_string())?;
    if (t.theta - 0.5).abs() > 1e-15 {
        return Err(format!("theta at (2, 4, 2, 1) is {}", t.theta));
    }
    let t = solve_theta::<f64>(2, 6.0, 2.0, 1.0).map_err(|e| e.to_string())?;
    if (t.theta - 2.0 / 6.0).abs() > 1e-15 {
        return Err(format!("theta at s = n/2 is {}, expected q/p", t.theta));
    }
    for (n, p, q, s) in [(2, 4.0, 4.0, 1.0), (2, 4.0, 2.0, 0.5), (1, 4.0, 6.0, 1.0)] {
        if solve_theta(n, p, q, s).is_ok() {
            return Err(format!("accepted ({n}, {p}, {q}, {s})"));
        }
    }
    Ok("theta = 1/2 at (2, 4, 2, 1); inadmissible tuples rejected".into())
}

fn gn1_checks() -> Check {
    let t = solve_theta::<f64>(2, 4.0, 2.0, 1.0).map_err(|e| e.to_string())?;
    let f = shaped(spec(2, 4.0, 256), GeneratorId::Gaussian, 0.65)?;
    let rep = inequality::verify_gn1(&f, &t).map_err(|e| e.to_string())?;
    let drift = rep.scaling_drift.ok_or("no drift for the gaussian")?;
    let off = t.perturbed(0.1);
    let control = dilation_drift(&f, |g| inequality::verify_gn1(g, &off))
        .map_err(|e| e.to_string())?
        .ok_or("no drift for the negative control")?;
    let scaled = inequality::verify_gn1(&f.scale(-3.5), &t).map_err(|e| e.to_string())?;
    let homog = (scaled.ratio / rep.ratio - 1.0).abs();
    ensure(
        rep.passed() && control > tol::NEGATIVE_CONTROL_DRIFT && homog <= tol::HOMOGENEITY_REL,
        format!("ratio {:.4}, drift {drift:.4}, negative control {control:.4}", rep.ratio),
    )
}

fn spectral_checks() -> Check {
    let f = shaped(spec(1, 32.0, 4096), GeneratorId::Gaussian, 0.65)?;
    let eps = inequality::verify_eps(&f, 4.0).map_err(|e| e.to_string())?;
    let mut g = Generator::plain(GeneratorId::Gaussian);
    g.dilation = 0.65;
    g.band_limit = Some(3.0 / 0.65);
    let band = sample_recipe(spec(1, 8.0, 4096), &g).map_err(|e| e.to_string())?;
    let bern = inequality::verify_bernstein(&band, 2.0, 4.0, 3.0 / 0.65).map_err(|e| e.to_string())?;
    let wide = shaped(spec(1, 8.0, 4096), GeneratorId::Tent, 1.0)?;
    if inequality::verify_bernstein(&wide, 2.0, 4.0, 2.0).is_ok() {
        return Err("unlimited spectrum passed the band-limit gate".into());
    }
    let mut hy = 0.0f64;
    let mut hy_ok = true;
    for p in [1.0, 1.5, 2.0] {
        let rep = inequality::verify_hausdorff_young(&f, p).map_err(|e| e.to_string())?;
        hy = hy.max(rep.ratio);
        hy_ok &= rep.passed();
    }
    ensure(
        eps.passed() && bern.passed() && eps.scaling_drift.is_some() && bern.scaling_drift.is_some() && hy_ok,
        format!(
            "eps drift {:.4}, bernstein drift {:.4}, max Hausdorff-Young ratio {hy:.6}",
            eps.scaling_drift.unwrap_or(f64::NAN),
            bern.scaling_drift.unwrap_or(f64::NAN)
        ),
    )
}

/// Runs every check, one PASS/FAIL line each; exit code 1 on any failure.
pub fn run(out: &mut dyn Write) -> u8 {
    let checks: [(&str, fn() -> Check); 9] = [
        ("distribution", distribution_checks),
        ("interpolation", interpolation_checks),
        ("fourier", fourier_checks),
        ("young", young_checks),
        ("calderon-zygmund", cz_checks),
        ("bmo", bmo_checks),
        ("theta", theta_checks),
        ("gn1", gn1_checks),
        ("spectral", spectral_checks),
    ];
    let mut code = crate::EXIT_OK;
    for (name, check) in checks {
        let line = match check() {
            Ok(detail) => format!("PASS {name}: {detail}"),
            Err(detail) => {
                code = crate::EXIT_VIOLATION;
                format!("FAIL {name}: {detail}")
            }
        };
        let _ = writeln!(out, "{line}");
    }
    code
}
