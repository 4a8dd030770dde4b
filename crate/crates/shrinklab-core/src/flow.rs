//! Mean curvature flow on the flat background, singular-time detection,
//! type-I monitoring, and the rescaling that exposes the shrinker limit.
//!
//! On the flat Gaussian background the soliton-coupled flow reduces to
//! Euclidean mean curvature flow up to an affine time change, and the
//! rescaling map is the homothety x / sqrt(T - t); its fixed points are
//! exactly the lambda = -1/2 shrinkers.

use crate::error::{Error, Result};
use crate::functional::weighted_volume;
use crate::geometry::{
    induced_geometry, mean_curvature_field, self_similar_residual, InducedGeometry,
    MeanCurvatureField,
};
use crate::immersion::Immersion;
use crate::numerics::AVec;

/// Immersion evolving by its mean curvature.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub immersion: Immersion,
    pub t: f64,
    pub dt_last: f64,
}

impl FlowState {
    pub fn new(immersion: Immersion) -> Result<Self> {
        if !immersion.background().is_flat() {
            return Err(Error::FlowNeedsFlat);
        }
        Ok(FlowState {
            immersion,
            t: 0.0,
            dt_last: 0.0,
        })
    }
}

/// Parabolic stability bound for the explicit step.
pub fn stability_bound(f: &Immersion, geo: &InducedGeometry) -> f64 {
    let h = f.grid().h_min();
    0.2 * h * h * geo.min_metric_eig / (1.0 + geo.sup_a * geo.sup_a)
}

fn stability_bound_lean(f: &Immersion, mc: &MeanCurvatureField) -> f64 {
    let h = f.grid().h_min();
    0.2 * h * h * mc.min_metric_eig / (1.0 + mc.sup_a * mc.sup_a)
}

fn rk4_step(f: &Immersion, dt: f64) -> Result<Immersion> {
    let shift = |base: &Immersion, field: &[AVec], c: f64| -> Result<Immersion> {
        let pts = base
            .points()
            .iter()
            .zip(field)
            .map(|(p, v)| {
                let mut q = *p;
                crate::numerics::axpy(&mut q, c, v);
                q
            })
            .collect();
        base.with_points(pts)
    };
    let k1 = mean_curvature_field(f)?.mean_curv;
    let k2 = mean_curvature_field(&shift(f, &k1, 0.5 * dt)?)?.mean_curv;
    let k3 = mean_curvature_field(&shift(f, &k2, 0.5 * dt)?)?.mean_curv;
    let k4 = mean_curvature_field(&shift(f, &k3, dt)?)?.mean_curv;
    let pts = (0..f.grid().nodes())
        .map(|i| {
            let mut p = *f.point(i);
            for d in 0..4 {
                p[d] += dt / 6.0 * (k1[i][d] + 2.0 * k2[i][d] + 2.0 * k3[i][d] + k4[i][d]);
            }
            p
        })
        .collect();
    f.with_points(pts)
}

/// One explicit step of dF/dt = H; the step must respect the stability
/// bound computed from the current geometry.
pub fn mcf_step(state: &FlowState, dt: f64) -> Result<FlowState> {
    if !state.immersion.background().is_flat() {
        return Err(Error::FlowNeedsFlat);
    }
    let geo = induced_geometry(&state.immersion)?;
    let bound = stability_bound(&state.immersion, &geo);
    if dt > bound {
        return Err(Error::StabilityBound { dt, bound });
    }
    let next = rk4_step(&state.immersion, dt)?;
    // Immersivity re-check.
    let _ = induced_geometry(&next)?;
    Ok(FlowState {
        immersion: next,
        t: state.t + dt,
        dt_last: dt,
    })
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct MonitorRow {
    pub t: f64,
    pub max_a: f64,
}

#[derive(Debug, Clone)]
pub struct FlowRun {
    /// Sampled states (always includes the initial and final ones).
    pub states: Vec<FlowState>,
    pub monitor: Vec<MonitorRow>,
    /// Singular time extrapolated from the blow-up of max |A|.
    pub t_est: f64,
    /// sup over the run of sqrt(T_est - t) max |A|: finite for type I.
    pub type_i_sup: f64,
    /// False when the flow ran out of budget without curvature blow-up
    /// (converged toward a minimal limit; reported, not an error).
    pub blew_up: bool,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct FlowOptions {
    pub sample_every: usize,
    pub max_steps: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            sample_every: 64,
            max_steps: 2_000_000,
        }
    }
}

/// Integrate until max |A| reaches `stop_a`, then extrapolate the singular
/// time by a linear fit of 1 / max|A|^2 over the last decade of growth.
pub fn run_to_singularity(
    initial: &FlowState,
    stop_a: f64,
    opts: &FlowOptions,
) -> Result<FlowRun> {
    let mut state = initial.clone();
    let mut monitor: Vec<MonitorRow> = Vec::new();
    let mut states: Vec<FlowState> = vec![state.clone()];
    let mut blew_up = false;
    let mut steps = 0usize;
    loop {
        let mc = mean_curvature_field(&state.immersion)?;
        let max_a = mc.sup_a;
        if steps % opts.sample_every == 0 {
            monitor.push(MonitorRow { t: state.t, max_a });
            if steps > 0 {
                states.push(state.clone());
            }
        }
        if max_a >= stop_a {
            if monitor.last().map(|m| m.t) != Some(state.t) {
                monitor.push(MonitorRow { t: state.t, max_a });
                states.push(state.clone());
            }
            blew_up = true;
            break;
        }
        if steps >= opts.max_steps {
            break;
        }
        let dt = stability_bound_lean(&state.immersion, &mc);
        let next = rk4_step(&state.immersion, dt)?;
        state = FlowState {
            immersion: next,
            t: state.t + dt,
            dt_last: dt,
        };
        steps += 1;
    }

    // Fit 1/maxA^2 = alpha - beta t over the last decade of growth.
    let a_end = monitor.last().map(|m| m.max_a).unwrap_or(0.0);
    let window: Vec<&MonitorRow> = monitor
        .iter()
        .filter(|m| m.max_a >= a_end / 10.0_f64.sqrt())
        .collect();
    let t_est = if window.len() >= 3 {
        let n = window.len() as f64;
        let sx: f64 = window.iter().map(|m| m.t).sum();
        let sy: f64 = window.iter().map(|m| 1.0 / (m.max_a * m.max_a)).sum();
        let sxx: f64 = window.iter().map(|m| m.t * m.t).sum();
        let sxy: f64 = window
            .iter()
            .map(|m| m.t / (m.max_a * m.max_a))
            .sum();
        let beta = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
        let alpha = (sy + beta * sx) / n;
        alpha / beta
    } else {
        // Too little data for a fit: fall back to the circle law scale.
        state.t + 0.5 / (a_end * a_end).max(1e-300)
    };
    let type_i_sup = monitor
        .iter()
        .map(|m| ((t_est - m.t).max(0.0)).sqrt() * m.max_a)
        .fold(0.0, f64::max);
    Ok(FlowRun {
        states,
        monitor,
        t_est,
        type_i_sup,
        blew_up,
        steps,
    })
}

/// Homothety x / sqrt(T - t): the flat-background realization of the
/// soliton-flow rescaling whose fixed points are lambda = -1/2 shrinkers.
pub fn rescale(f: &Immersion, t: f64, t_singular: f64) -> Result<Immersion> {
    if t_singular <= t {
        return Err(Error::RescaleTime { t, t_singular });
    }
    let s = 1.0 / (t_singular - t).sqrt();
    f.map_points(|p| crate::numerics::scale(p, s))
}

/// Shrinker residual of each rescaled sampled state.
pub fn convergence_monitor(run: &FlowRun) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for state in &run.states {
        if state.t >= run.t_est {
            continue;
        }
        let rescaled = rescale(&state.immersion, state.t, run.t_est)?;
        let geo = induced_geometry(&rescaled)?;
        let res = self_similar_residual(&rescaled, &geo, -0.5);
        out.push((state.t, res.sup));
    }
    Ok(out)
}

/// Euclidean volume of each sampled state (non-increasing along the flow).
pub fn volume_series(run: &FlowRun) -> Result<Vec<(f64, f64)>> {
    run.states
        .iter()
        .map(|s| {
            let geo = induced_geometry(&s.immersion)?;
            Ok((s.t, weighted_volume(&s.immersion, &geo, 0.0)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::geometry::lagrangian_defect_norm;
    use std::f64::consts::SQRT_2;

    fn mean_radius(f: &Immersion) -> f64 {
        f.points().iter().map(|p| p[0].hypot(p[1])).sum::<f64>() / f.points().len() as f64
    }

    #[test]
    fn step_rejects_unstable_dt() {
        let im = generate::circle(1.0, 64).unwrap();
        let state = FlowState::new(im).unwrap();
        let err = mcf_step(&state, 1.0).unwrap_err();
        assert!(matches!(err, Error::StabilityBound { .. }));
    }

    #[test]
    fn flow_requires_flat_background() {
        let im = generate::great_circle(64, 1.0).unwrap();
        assert!(matches!(FlowState::new(im), Err(Error::FlowNeedsFlat)));
    }

    #[test]
    fn circle_radius_law_and_t_est() {
        for r0 in [1.3_f64, SQRT_2, 2.0] {
            let im = generate::circle(r0, 256).unwrap();
            let state = FlowState::new(im).unwrap();
            let stop_a = 3.0 / r0;
            let run = run_to_singularity(&state, stop_a, &FlowOptions::default()).unwrap();
            assert!(run.blew_up);
            let t_exact = r0 * r0 / 2.0;
            assert!(
                (run.t_est - t_exact).abs() < 1e-2,
                "r0={r0}: T_est {} vs {t_exact}",
                run.t_est
            );
            for s in &run.states {
                let exact = (r0 * r0 - 2.0 * s.t).sqrt();
                let got = mean_radius(&s.immersion);
                assert!(
                    (got - exact).abs() < 1e-4,
                    "r0={r0} t={}: r {got} vs {exact}",
                    s.t
                );
            }
        }
    }

    #[test]
    fn type_i_monitor_on_sqrt2_circle() {
        let im = generate::circle(SQRT_2, 256).unwrap();
        let state = FlowState::new(im).unwrap();
        let run = run_to_singularity(&state, 3.0 / SQRT_2, &FlowOptions::default()).unwrap();
        // sqrt(T - t) max|A| is 1/sqrt(2) for the exact circle law.
        let last = run.monitor.last().unwrap();
        let last_val = ((run.t_est - last.t).max(0.0)).sqrt() * last.max_a;
        assert!(
            (last_val - 1.0 / SQRT_2).abs() < 1e-2,
            "type I {last_val}"
        );
        assert!((run.type_i_sup - 1.0 / SQRT_2).abs() < 1e-2);
    }

    #[test]
    fn rescaled_residual_falls_to_floor() {
        let im = generate::circle(1.3, 256).unwrap();
        let state = FlowState::new(im).unwrap();
        let run = run_to_singularity(&state, 3.0 / 1.3, &FlowOptions::default()).unwrap();
        let series = convergence_monitor(&run).unwrap();
        let min = series.iter().map(|&(_, r)| r).fold(f64::MAX, f64::min);
        assert!(min < 1e-3, "rescaled residual best {min}");
    }

    #[test]
    fn gauge_identity_on_flowed_sqrt2_circle() {
        // Flowing the exact shrinker and rescaling with T = 1 reproduces a
        // t-independent immersion.
        let im = generate::circle(SQRT_2, 256).unwrap();
        let state = FlowState::new(im.clone()).unwrap();
        let run = run_to_singularity(&state, 3.0, &FlowOptions::default()).unwrap();
        for s in run.states.iter().take(5) {
            let r = rescale(&s.immersion, s.t, 1.0).unwrap();
            for (a, b) in r.points().iter().zip(im.points()) {
                for d in 0..4 {
                    assert!((a[d] - b[d]).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn product_torus_first_factor_vanishes() {
        let im = generate::product_torus(&[SQRT_2, 2.0], 32, 32).unwrap();
        let state = FlowState::new(im).unwrap();
        // Deep enough that the first factor dominates max|A| and the
        // blow-up fit sees the asymptotic law.
        let run = run_to_singularity(&state, 5.0, &FlowOptions::default()).unwrap();
        assert!(run.blew_up);
        assert!((run.t_est - 1.0).abs() < 1e-2, "T_est {}", run.t_est);
        // The first factor shrinks fastest.
        let last = &run.states.last().unwrap().immersion;
        let mut r1 = 0.0_f64;
        let mut r2 = 0.0_f64;
        for p in last.points() {
            r1 += p[0].hypot(p[1]);
            r2 += p[2].hypot(p[3]);
        }
        assert!(r1 < r2);
    }

    #[test]
    fn volume_non_increasing() {
        let base = generate::product_torus(&[1.2, 1.4], 32, 32).unwrap();
        let im = generate::perturb(&base, 0.03, 2, 4).unwrap();
        let state = FlowState::new(im).unwrap();
        let run = run_to_singularity(&state, 3.0, &FlowOptions::default()).unwrap();
        let vols = volume_series(&run).unwrap();
        for w in vols.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-9, "volume grew: {:?}", w);
        }
    }

    #[test]
    fn lagrangian_condition_preserved() {
        let base = generate::product_torus(&[SQRT_2, SQRT_2], 32, 32).unwrap();
        let im = generate::hamiltonian_deform(&base, 5, 0.05, 8).unwrap();
        let geo0 = induced_geometry(&im).unwrap();
        let d0 = lagrangian_defect_norm(&geo0);
        let state = FlowState::new(im).unwrap();
        let run = run_to_singularity(&state, 2.0 * geo0.sup_a, &FlowOptions::default())
            .unwrap();
        for s in &run.states {
            let g = induced_geometry(&s.immersion).unwrap();
            let d = lagrangian_defect_norm(&g);
            assert!(d < 10.0 * d0, "defect {d} vs initial {d0}");
        }
    }

    #[test]
    fn rescale_time_guard() {
        let im = generate::circle(1.0, 64).unwrap();
        assert!(matches!(
            rescale(&im, 1.0, 0.5),
            Err(Error::RescaleTime { .. })
        ));
        // t = 0, T = 1: identity.
        let r = rescale(&im, 0.0, 1.0).unwrap();
        assert_eq!(r.points(), im.points());
    }

    #[test]
    fn stationary_affine_patch_interior() {
        // Straight patches have H = 0; one explicit step leaves interior
        // nodes untouched (the wrap seam is excluded as in the stencil
        // tests).
        let grid = crate::grid::ParamGrid::torus(32, 32).unwrap();
        let a = [0.3, 0.1, 0.0, 0.0];
        let b = [0.0, 0.0, 0.8, -0.2];
        let pts: Vec<AVec> = (0..grid.nodes())
            .map(|n| {
                let c = grid.coords(n);
                let mut p = [0.0; 4];
                crate::numerics::axpy(&mut p, c[0], &a);
                crate::numerics::axpy(&mut p, c[1], &b);
                p
            })
            .collect();
        let im = Immersion::new(
            grid,
            crate::background::SolitonBackground::FlatGaussian { m: 2 },
            pts,
        )
        .unwrap();
        let state = FlowState::new(im.clone()).unwrap();
        let geo = induced_geometry(&im).unwrap();
        let dt = stability_bound(&im, &geo);
        let next = mcf_step(&state, dt).unwrap();
        for i in 4..28 {
            for j in 4..28 {
                let node = grid.index(i, j);
                for d in 0..4 {
                    assert!(
                        (next.immersion.point(node)[d] - im.point(node)[d]).abs() < 1e-12
                    );
                }
            }
        }
    }
}
