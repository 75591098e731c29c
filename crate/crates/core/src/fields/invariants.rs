//! Orbit energy, winding functional `Δ(Φ,α)` and the flux identity.

use rayon::prelude::*;

use super::isotopy::{CoIsotopy, Isotopy, Kind};
use crate::error::{Error, Result};
use crate::manifold::{hodge_split, OneFormField, Point};
use crate::report::VerificationReport;

/// Default quadrature resolution per coordinate.
pub const DEFAULT_GRID: usize = 32;
/// Cap on the number of symplectic-factor grid points that get a flow solve.
pub const MAX_XY_POINTS: usize = 1 << 14;

fn require_autonomous_co_ham(iso: &CoIsotopy) -> Result<()> {
    if iso.kind() != Kind::CoHamiltonian {
        return Err(super::isotopy::kind_mismatch(Kind::CoHamiltonian, iso.kind()));
    }
    if !iso.is_autonomous() {
        return Err(Error::NonAutonomous);
    }
    Ok(())
}

/// `(t, G(φ_t(p)))` along the orbit of `p`.
pub fn orbit_energy_profile(iso: &CoIsotopy, p: &Point, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    require_autonomous_co_ham(iso)?;
    Ok(grid
        .iter()
        .map(|&t| (t, iso.generator_value(&iso.map(p, t), 0.0)))
        .collect())
}

/// `max_t |G(φ_t p) − G(p) − ∫_0^t η(X)²(φ_s p) ds|` on `[0,1]` at the flow
/// resolution; the integral uses the trapezoid rule between step points with
/// a Simpson midpoint correction.
pub fn orbit_energy_defect(iso: &CoIsotopy, p: &Point) -> Result<f64> {
    require_autonomous_co_ham(iso)?;
    let traj = iso.trajectory(p);
    let n = traj.len() - 1;
    let h = 1.0 / n as f64;
    let zi = iso.model().z_index();
    let c2 = |z: f64| iso.reeb_velocity(z, 0.0).powi(2);
    let g0 = iso.generator_value(p, 0.0);
    let mut acc = 0.0;
    let mut worst = 0.0_f64;
    for i in 0..n {
        let (a, b) = (traj[i][zi], traj[i + 1][zi]);
        acc += h / 6.0 * (c2(a) + 4.0 * c2(0.5 * (a + b)) + c2(b));
        let g = iso.generator_value(&traj[i + 1], 0.0);
        worst = worst.max((g - g0 - acc).abs());
    }
    Ok(worst)
}

fn simpson_weights(n: usize) -> Vec<f64> {
    let h = 1.0 / n as f64;
    let mut w = vec![0.0; n + 1];
    if n == 1 {
        w[0] = 0.5 * h;
        w[1] = 0.5 * h;
        return w;
    }
    // composite Simpson on an even prefix, 3/8 rule on a trailing triple
    let even = if n % 2 == 0 { n } else { n - 3 };
    for i in (0..even).step_by(2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if even < n {
        for (j, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
            w[even + j] += 3.0 * h / 8.0 * c;
        }
    }
    w
}

/// `Δ(Φ,α)(p) = ∫_0^1 α(φ̇_t)(φ_t(p)) dt` by composite Simpson.
pub fn winding(iso: &CoIsotopy, alpha: &OneFormField, p: &Point) -> Result<f64> {
    alpha.check_closed()?;
    if alpha.dim() != iso.model().dim() {
        return Err(Error::InvalidDimension("form and model dimensions differ".into()));
    }
    let traj = iso.trajectory(p);
    let n = traj.len() - 1;
    let w = simpson_weights(n);
    Ok(traj
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let t = i as f64 / n as f64;
            w[i] * alpha.eval(q.as_slice()).dot(&iso.vector_field(q, t))
        })
        .sum())
}

/// `Δ(Φ,α)` sampled on a uniform grid over the fundamental domain.
#[derive(Debug, Clone, PartialEq)]
pub struct WindingGrid {
    pub xy_resolution: usize,
    pub z_resolution: usize,
    /// Row-major, z fastest.
    pub values: Vec<f64>,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Largest time-1 displacement over the grid (zero for loops).
    pub max_displacement: f64,
}

/// Per-coordinate resolution on the symplectic factor, capped so at most
/// [`MAX_XY_POINTS`] flow solves are needed.
pub fn xy_resolution(n: usize, res: usize) -> usize {
    let cap = (MAX_XY_POINTS as f64).powf(1.0 / (2 * n) as f64).floor() as usize;
    res.min(cap).max(2)
}

struct TimeOneGrid {
    xy_res: usize,
    z_res: usize,
    /// Start and image of every symplectic-factor grid node (z slot unused).
    xy: Vec<(Point, Point)>,
    /// Start and image of every z node.
    z: Vec<(f64, f64)>,
}

/// Time-1 images on a product grid. The xy-flow of a [`CoIsotopy`] never
/// sees `z` and the z-flow never sees `xy`, so the grid map factors.
fn time_one_grid(iso: &CoIsotopy, res: usize) -> Result<TimeOneGrid> {
    let model = iso.model();
    if !model.is_circle() {
        return Err(Error::UnboundedDomain);
    }
    let dim = model.dim();
    let zi = model.z_index();
    let xy_res = xy_resolution(model.n, res);
    let z_res = res.max(2);
    let step = |r: usize| std::f64::consts::TAU / r as f64;
    let count = xy_res.pow(zi as u32);
    let xy: Vec<(Point, Point)> = (0..count)
        .into_par_iter()
        .map(|mut idx| {
            let mut p = Point::zeros(dim);
            for d in 0..zi {
                p[d] = (idx % xy_res) as f64 * step(xy_res);
                idx /= xy_res;
            }
            (p, iso.map(&p, 1.0))
        })
        .collect();
    let z = (0..z_res)
        .into_par_iter()
        .map(|k| {
            let z0 = k as f64 * step(z_res);
            (z0, iso.z_map(z0, 1.0))
        })
        .collect();
    Ok(TimeOneGrid { xy_res, z_res, xy, z })
}

fn winding_on(grid: &TimeOneGrid, alpha: &OneFormField) -> Result<WindingGrid> {
    let (harmonic, u) = hodge_split(alpha)?;
    let h = harmonic.means();
    let zi = alpha.dim() - 1;
    let values: Vec<f64> = grid
        .xy
        .par_iter()
        .flat_map_iter(|(p, q)| {
            let h = &h;
            let u = &u;
            grid.z.iter().map(move |&(z0, z1)| {
                let mut a = *p;
                let mut b = *q;
                a[zi] = z0;
                b[zi] = z1;
                // Δ = ∫h(φ̇) + ∫dU(φ̇) = h·(φ₁p − p) + U(φ₁p) − U(p)
                let shift: f64 = (0..=zi).map(|d| h[d] * (b[d] - a[d])).sum();
                shift + u.eval(b.as_slice()) - u.eval(a.as_slice())
            })
        })
        .collect();
    let max_displacement = grid
        .xy
        .iter()
        .map(|(p, q)| q.sub(p).max_abs())
        .chain(grid.z.iter().map(|(a, b)| (b - a).abs()))
        .fold(0.0, f64::max);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    Ok(WindingGrid {
        xy_resolution: grid.xy_res,
        z_resolution: grid.z_res,
        values,
        mean,
        min,
        max,
        max_displacement,
    })
}

/// `Δ(Φ,α)` over a `res^dim` grid (see [`xy_resolution`] for the cap when n > 1).
pub fn winding_grid(iso: &CoIsotopy, alpha: &OneFormField, res: usize) -> Result<WindingGrid> {
    alpha.check_closed()?;
    winding_on(&time_one_grid(iso, res)?, alpha)
}

/// Mean-zero and sign-bracketing checks for `Δ(Φ,α)`.
pub fn mean_winding_integral(
    iso: &CoIsotopy,
    alpha: &OneFormField,
    res: usize,
    tol_quad: f64,
) -> Result<VerificationReport> {
    if iso.kind() != Kind::CoHamiltonian {
        return Err(super::isotopy::kind_mismatch(Kind::CoHamiltonian, iso.kind()));
    }
    let g = winding_grid(iso, alpha, res)?;
    let slack = 1e-8;
    let mut r = VerificationReport::new("mean_winding_integral");
    r.check_le("abs_mean", g.mean.abs(), tol_quad, "quadrature tolerance")
        .check_le("min", g.min, slack, "min ≤ 0")
        .check_ge("max", g.max, -slack, "max ≥ 0")
        .info("xy_resolution", g.xy_resolution as f64)
        .info("z_resolution", g.z_resolution as f64);
    if g.max_displacement <= 1e-8 {
        // a loop: Δ must vanish identically
        r.check_le("loop_spread", g.max - g.min, tol_quad, "contractible orbits");
    }
    Ok(r)
}

/// `|∫ Δ(Φ,η) α∧ωⁿ − ∫ Δ(Φ,α) η∧ωⁿ|` by grid quadrature.
pub fn flux_identity_residual(iso: &CoIsotopy, alpha: &OneFormField, res: usize) -> Result<f64> {
    if iso.kind() != Kind::CoHamiltonian {
        return Err(super::isotopy::kind_mismatch(Kind::CoHamiltonian, iso.kind()));
    }
    alpha.check_closed()?;
    let model = iso.model();
    let vol = model.volume()?;
    let zi = model.z_index();
    let grid = time_one_grid(iso, res)?;
    let d_alpha = winding_on(&grid, alpha)?;
    let d_eta = winding_on(&grid, &OneFormField::basis(model.dim(), zi))?;
    // α∧ωⁿ = α_z η∧ωⁿ: only the dz coefficient survives
    let az = alpha.component(zi);
    let step = |r: usize| std::f64::consts::TAU / r as f64;
    let mut lhs = 0.0;
    let mut idx = 0;
    for (p, _) in &grid.xy {
        for k in 0..grid.z_res {
            let mut q = *p;
            q[zi] = k as f64 * step(grid.z_res);
            lhs += d_eta.values[idx] * az.eval(q.as_slice());
            idx += 1;
        }
    }
    let n = d_alpha.values.len() as f64;
    Ok((vol * lhs / n - vol * d_alpha.mean).abs())
}

/// `max − min` of `C(Φ,η)^t` over the z-grid (it never depends on x, y).
pub fn c_function_spread(iso: &dyn Isotopy, t: f64, res: usize) -> f64 {
    let vals: Vec<f64> = (0..res)
        .into_par_iter()
        .map(|k| {
            let z = k as f64 * std::f64::consts::TAU / res as f64;
            iso.reeb_velocity(iso.z_map(z, t), t)
        })
        .collect();
    let (lo, hi) = vals
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    hi - lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::generator::ReebComponent;
    use crate::manifold::{FourierScalar, FourierTerm, ModelSpec};

    fn sin_y() -> FourierScalar {
        FourierScalar::single(3, &[0, 1, 0], 0.0, 1.0).unwrap()
    }

    #[test]
    fn energy_constant_on_circle() {
        let iso = CoIsotopy::autonomous(ModelSpec::circle(1), &sin_y(), 256).unwrap();
        let p = Point::from_slice(&[0.3, 1.1, 2.0]);
        let prof = orbit_energy_profile(&iso, &p, &[0.0, 0.5, 1.0]).unwrap();
        assert!(prof.iter().all(|(_, g)| (g - 1.1f64.sin()).abs() < 1e-12));
        assert!(orbit_energy_defect(&iso, &p).unwrap() < 1e-12);
    }

    #[test]
    fn energy_slope_on_line() {
        let f = sin_y();
        let iso = CoIsotopy::new(
            ModelSpec::line(1),
            Kind::CoHamiltonian,
            crate::fields::Generator::raw(crate::fields::TimeFourier::autonomous(&f)),
            Some(ReebComponent::constant(0.3)),
            None,
            256,
        )
        .unwrap();
        let p = Point::from_slice(&[0.3, 1.1, 2.0]);
        let prof = orbit_energy_profile(&iso, &p, &[0.0, 1.0]).unwrap();
        assert!((prof[1].1 - prof[0].1 - 0.09).abs() < 1e-12);
        assert!(orbit_energy_defect(&iso, &p).unwrap() < 1e-12);
    }

    #[test]
    fn winding_closed_form() {
        let iso = CoIsotopy::autonomous(ModelSpec::circle(1), &sin_y(), 256).unwrap();
        let p = Point::from_slice(&[0.3, 0.7, 2.0]);
        let w = winding(&iso, &OneFormField::basis(3, 0), &p).unwrap();
        assert!((w - 0.7f64.cos()).abs() < 1e-12);
        assert_eq!(winding(&iso, &OneFormField::basis(3, 2), &p).unwrap(), 0.0);
        let bad = OneFormField::new(vec![
            FourierScalar::zero(3),
            FourierScalar::zero(3),
            FourierScalar::single(3, &[1, 0, 0], 1.0, 0.0).unwrap(),
        ])
        .unwrap();
        assert!(matches!(winding(&iso, &bad, &p), Err(Error::NotClosed { .. })));
    }

    #[test]
    fn simpson_weights_sum_to_one() {
        for n in [1, 2, 3, 5, 8, 9] {
            let s: f64 = simpson_weights(n).iter().sum();
            assert!((s - 1.0).abs() < 1e-14, "{n}");
        }
    }

    #[test]
    fn grid_mean_and_bracket() {
        let iso = CoIsotopy::autonomous(ModelSpec::circle(1), &sin_y(), 128).unwrap();
        let r = mean_winding_integral(&iso, &OneFormField::basis(3, 0), 16, 1e-6).unwrap();
        assert!(r.pass, "{r:?}");
        let g = winding_grid(&iso, &OneFormField::basis(3, 0), 16).unwrap();
        assert!((g.max - 1.0).abs() < 1e-12 && (g.min + 1.0).abs() < 1e-12);
        let id = CoIsotopy::identity(ModelSpec::circle(1), 16);
        let r = mean_winding_integral(&id, &OneFormField::basis(3, 1), 8, 1e-6).unwrap();
        assert!(r.pass && r.value("loop_spread") == Some(0.0));
    }

    #[test]
    fn flux_examples() {
        let iso = CoIsotopy::autonomous(ModelSpec::circle(1), &sin_y(), 128).unwrap();
        assert!(flux_identity_residual(&iso, &OneFormField::basis(3, 0), 16).unwrap() <= 1e-6);
        let f = FourierScalar::from_terms(
            3,
            [
                FourierTerm { k: vec![1, 1, 0], a: 0.0, b: 0.5 },
                FourierTerm { k: vec![1, -1, 0], a: 0.0, b: 0.5 },
            ],
        )
        .unwrap();
        let iso = CoIsotopy::autonomous(ModelSpec::circle(1), &f, 128).unwrap();
        assert!(flux_identity_residual(&iso, &OneFormField::basis(3, 1), 16).unwrap() <= 1e-5);
    }

    #[test]
    fn trajectory_matches_map() {
        let iso = CoIsotopy::autonomous(ModelSpec::circle(1), &sin_y(), 64).unwrap();
        let p = Point::from_slice(&[0.3, 0.7, 2.0]);
        let tr = iso.trajectory(&p);
        assert_eq!(tr[64], iso.map(&p, 1.0));
        assert_eq!(tr[17], iso.map(&p, 17.0 / 64.0));
    }
}
