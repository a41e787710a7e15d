use std::f64::consts::{PI, TAU};

use super::*;
use crate::expr::ScalarFn;

fn flat(n: usize) -> (ChartMetric, Grid) {
    let c = ChartMetric::flat_torus(2);
    let g = Grid::for_chart(&c, n).unwrap();
    (c, g)
}

fn barotropic_linear() -> Eos {
    Eos::barotropic(ScalarFn::identity())
}

fn pulse(grid: Grid) -> FluidState {
    FluidState::from_fn(
        grid,
        0.0,
        |x| vec![0.3 * x[1].sin(), 0.2 * x[0].cos()],
        |x| 1.0 + 0.2 * (x[0] - PI).cos() * x[1].sin(),
        |x| 0.5 * (x[0] + x[1]).sin(),
    )
}

#[test]
fn uniform_state_is_an_equilibrium() {
    let (c, g) = flat(16);
    let s = FluidState::uniform(g.clone(), &[0.3, -0.2], 1.3, 0.4);
    let solver = Solver::new(&c, &g, Eos::polytropic(1.0, 1.4), SolverConfig::new(1e-2, 1.0)).unwrap();
    let r = solver.rhs(&s).unwrap();
    assert!(r.rho.iter().chain(&r.s).chain(r.u.iter().flatten()).all(|v| v.abs() < 1e-14));
    let next = solver.step(&s).unwrap();
    assert!(next.max_diff(&s) <= 1e-13);
    assert!((next.t - 1e-2).abs() < 1e-15);
}

#[test]
fn pressure_gradient_example() {
    let (c, g) = flat(64);
    let s = FluidState::from_fn(g.clone(), 0.0, |_| vec![0.0, 0.0], |x| 1.0 + 0.1 * x[0].sin(), |_| 0.0);
    let geom = GridGeometry::new(&c, &g).unwrap();
    let r = euler_rhs(&s, &geom, &barotropic_linear(), SpatialOrder::Fourth).unwrap();
    for (p, x) in g.points().iter().enumerate() {
        let exact = -0.1 * x[0].cos() / (1.0 + 0.1 * x[0].sin());
        assert!((r.u[0][p] - exact).abs() < 1e-6);
        assert!(r.u[1][p].abs() < 1e-15);
    }
}

#[test]
fn centripetal_term_on_the_torus() {
    let c = ChartMetric::torus_of_revolution(2, 2.0).unwrap();
    let g = Grid::for_chart(&c, 16).unwrap();
    let eps = 0.3;
    let s = FluidState::uniform(g.clone(), &[0.0, eps], 1.0, 0.0);
    let geom = GridGeometry::new(&c, &g).unwrap();
    let r = euler_rhs(&s, &geom, &Eos::polytropic(1.0, 2.0), SpatialOrder::Second).unwrap();
    for (p, x) in g.points().iter().enumerate() {
        let f = 2.0 + x[0].cos();
        let expect = f * (-x[0].sin()) * eps * eps;
        assert!((r.u[0][p] - expect).abs() < 1e-13);
        assert!(r.u[1][p].abs() < 1e-13 && r.rho[p].abs() < 1e-13);
    }
}

#[test]
fn total_mass_is_conserved_to_rounding() {
    let (c, g) = flat(64);
    let solver = Solver::new(&c, &g, barotropic_linear(), SolverConfig::new(5e-3, 1.0)).unwrap();
    let mut s = pulse(g);
    let m0 = solver.geom.integrate(&s.rho);
    for _ in 0..20 {
        let next = solver.step(&s).unwrap();
        let m1 = solver.geom.integrate(&next.rho);
        assert!((m1 - solver.geom.integrate(&s.rho)).abs() <= 1e-12 * m0);
        s = next;
    }
}

#[test]
fn cfl_violation_is_refused_with_a_suggestion() {
    let (c, g) = flat(64);
    let solver = Solver::new(&c, &g, barotropic_linear(), SolverConfig::new(0.5, 1.0)).unwrap();
    match solver.step(&pulse(g)) {
        Err(Error::Cfl { dt, suggested }) => assert!(dt == 0.5 && suggested < 0.1),
        other => panic!("{other:?}"),
    }
}

#[test]
fn negative_density_aborts_with_location() {
    let (c, g) = flat(16);
    let mut s = FluidState::uniform(g.clone(), &[0.0, 0.0], 1.0, 0.0);
    s.rho[37] = -0.5;
    let geom = GridGeometry::new(&c, &g).unwrap();
    match euler_rhs(&s, &geom, &barotropic_linear(), SpatialOrder::Second) {
        Err(Error::NonPositiveDensity { index, .. }) => assert_eq!(index, 37),
        other => panic!("{other:?}"),
    }
}

fn run_to(chart: &ChartMetric, n: usize, dt: f64, t_end: f64, eos: &Eos, init: &dyn Fn(Grid) -> FluidState) -> FluidState {
    let g = Grid::for_chart(chart, n).unwrap();
    let solver = Solver::new(chart, &g, eos.clone(), SolverConfig::new(dt, t_end)).unwrap();
    solver.run(init(g), &mut [], |_, _, _| Ok(())).unwrap()
}

/// max |coarse − fine| over the coarse nodes (fine grid has twice the points per axis).
fn restricted_diff(coarse: &FluidState, fine: &FluidState) -> f64 {
    let gc = &coarse.grid;
    let gf = &fine.grid;
    let mut worst: f64 = 0.0;
    for p in 0..gc.len() {
        let mi: Vec<usize> = gc.multi_index(p).iter().map(|i| 2 * i).collect();
        let q = gf.index(&mi);
        worst = worst.max((coarse.rho[p] - fine.rho[q]).abs());
        for i in 0..coarse.u.len() {
            worst = worst.max((coarse.u[i][p] - fine.u[i][q]).abs());
        }
    }
    worst
}

#[test]
fn second_order_in_space_on_flat_and_curved_charts() {
    let eos = Eos::polytropic(1.0, 1.4);
    for c in [ChartMetric::flat_torus(2), ChartMetric::torus_of_revolution(2, 2.0).unwrap()] {
        let s: Vec<FluidState> = [32, 64, 128].iter().map(|&n| run_to(&c, n, 2e-3, 0.2, &eos, &pulse)).collect();
        let ratio = restricted_diff(&s[0], &s[1]) / restricted_diff(&s[1], &s[2]);
        assert!(ratio.log2() >= 1.9, "{}: order {}", c.name, ratio.log2());
    }
}

#[test]
fn fourth_order_in_time() {
    let eos = Eos::polytropic(1.0, 1.4);
    let c = ChartMetric::flat_torus(2);
    let s: Vec<FluidState> = [0.04, 0.02, 0.01].iter().map(|&dt| run_to(&c, 32, dt, 0.4, &eos, &pulse)).collect();
    let ratio = s[0].max_diff(&s[1]) / s[1].max_diff(&s[2]);
    assert!(ratio.log2() >= 3.8, "order {}", ratio.log2());
}

#[test]
fn markers_at_rest_stay_put() {
    let (c, g) = flat(32);
    let geom = GridGeometry::new(&c, &g).unwrap();
    let s = FluidState::uniform(g, &[0.0, 0.0], 1.0, 0.0);
    let mut d = MarkerSet::disk_interior(&c, &[PI, PI], 1.0, 6).unwrap();
    let before = d.clone();
    advect_markers(&mut d, &s, &geom, SpatialOrder::Second, 0.1).unwrap();
    assert_eq!(d, before);
}

#[test]
fn rigid_translation_shifts_markers() {
    let (c, g) = flat(32);
    let geom = GridGeometry::new(&c, &g).unwrap();
    let s = FluidState::uniform(g, &[0.7, -0.4], 1.0, 0.0);
    let mut d = MarkerSet::disk_interior(&c, &[6.0, 0.2], 0.5, 4).unwrap();
    let before = d.clone();
    advect_markers(&mut d, &s, &geom, SpatialOrder::Second, 0.25).unwrap();
    for (a, b) in d.positions.iter().zip(&before.positions) {
        assert!((a[0] - b[0] - 0.175).abs() < 1e-13 && (a[1] - b[1] + 0.1).abs() < 1e-13);
    }
    for (a, b) in d.weights.iter().zip(&before.weights) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn radial_field_grows_weights_exponentially() {
    let c = ChartMetric::flat_patch(2);
    let g = Grid::for_chart(&c, 41).unwrap();
    let geom = GridGeometry::new(&c, &g).unwrap();
    let s = FluidState::from_fn(g, 0.0, |x| x.to_vec(), |_| 1.0, |_| 0.0);
    let mut d = MarkerSet::disk_interior(&c, &[0.0, 0.0], 0.1, 5).unwrap();
    let w0 = d.total_weight();
    let first = d.weights[3];
    let dt = 1e-3;
    for _ in 0..1000 {
        advect_markers(&mut d, &s, &geom, SpatialOrder::Second, dt).unwrap();
    }
    assert!((d.total_weight() / w0 - 2f64.exp()).abs() <= 1e-6 * 2f64.exp());
    assert!((d.weights[3] / first - 2f64.exp()).abs() <= 1e-6 * 2f64.exp());
}

#[test]
fn markers_leaving_a_patch_are_reported() {
    let c = ChartMetric::flat_patch(2);
    let g = Grid::for_chart(&c, 21).unwrap();
    let geom = GridGeometry::new(&c, &g).unwrap();
    let s = FluidState::uniform(g, &[5.0, 0.0], 1.0, 0.0);
    let mut d = MarkerSet::segment(&c, &[2.9, 0.0], &[3.0, 0.5], 4).unwrap();
    assert!(matches!(advect_markers(&mut d, &s, &geom, SpatialOrder::Second, 0.1), Err(Error::MarkerLost { .. })));
}

#[test]
fn cubic_transport_of_a_periodic_seam() {
    let (c, g) = flat(32);
    let geom = GridGeometry::new(&c, &g).unwrap();
    let s = FluidState::uniform(g, &[1.0, 0.0], 1.0, 0.0);
    let mut curve = MarkerSet::circle(&c, &[TAU - 0.1, 1.0], 0.5, 64, MarkerKind::Curve).unwrap();
    let len0 = curve.total_weight();
    advect_markers(&mut curve, &s, &geom, SpatialOrder::Second, 0.3).unwrap();
    assert!((curve.total_weight() - len0).abs() < 1e-12);
    assert!(curve.positions.iter().any(|x| x[0] > TAU));
}

mod props {
    use super::*;
    use proptest::prelude::*;

    fn wave(grid: Grid, a: [f64; 5]) -> FluidState {
        FluidState::from_fn(
            grid,
            0.0,
            move |x| vec![a[0] * x[1].sin() + a[1], a[2] * x[0].cos()],
            move |x| 1.0 + a[3] * (x[0] + 2.0 * x[1]).cos(),
            move |x| a[4] * (x[0] - x[1]).sin(),
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn flux_form_conserves_total_mass(
            a in prop::array::uniform5(-0.3f64..0.3),
            fourth in any::<bool>(),
        ) {
            let (c, g) = flat(24);
            let mut cfg = SolverConfig::new(5e-3, 1.0);
            if fourth {
                cfg.order = SpatialOrder::Fourth;
            }
            let solver = Solver::new(&c, &g, Eos::polytropic(1.0, 1.4), cfg).unwrap();
            let s = wave(g, a);
            let m0 = solver.geom.integrate(&s.rho);
            let m1 = solver.geom.integrate(&solver.step(&s).unwrap().rho);
            prop_assert!((m1 - m0).abs() <= 1e-12 * m0);
        }

        #[test]
        fn interpolation_weights_partition_unity(x0 in -10.0f64..10.0, x1 in -10.0f64..10.0, cubic in any::<bool>()) {
            let (_, g) = flat(12);
            let kind = if cubic { InterpKind::Cubic } else { InterpKind::Linear };
            let st = InterpStencil::new(&g, &[x0, x1], kind).unwrap();
            let total: f64 = st.nodes.iter().map(|(_, w)| w).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert_eq!(st.nodes.len(), if cubic { 16 } else { 4 });
        }

        #[test]
        fn interpolation_is_exact_at_nodes(i in 0usize..144, cubic in any::<bool>()) {
            let (_, g) = flat(12);
            let f: Vec<f64> = (0..g.len()).map(|k| ((k * 7919) % 101) as f64).collect();
            let kind = if cubic { InterpKind::Cubic } else { InterpKind::Linear };
            prop_assert!((interpolate(&g, &f, &g.point(i), kind).unwrap() - f[i]).abs() < 1e-9);
        }

        #[test]
        fn periodic_derivatives_have_zero_mean(a in prop::array::uniform5(-1.0f64..1.0), axis in 0usize..2) {
            let (_, g) = flat(20);
            let f: Vec<f64> = g.points().iter().map(|x| a[0] * (a[1] + x[0]).sin() * (a[2] * x[1]).exp() + a[3] * x[1].cos() + a[4]).collect();
            for order in [SpatialOrder::Second, SpatialOrder::Fourth] {
                let s: f64 = derivative(&g, &f, axis, order).iter().sum();
                prop_assert!(s.abs() < 1e-10);
            }
        }

        #[test]
        fn uniform_flow_is_steady(u0 in -0.5f64..0.5, u1 in -0.5f64..0.5, rho in 0.5f64..2.0, s in -1.0f64..1.0) {
            let (c, g) = flat(8);
            let solver = Solver::new(&c, &g, Eos::polytropic(1.0, 1.4), SolverConfig::new(1e-2, 1.0)).unwrap();
            let st = FluidState::uniform(g, &[u0, u1], rho, s);
            prop_assert!(solver.step(&st).unwrap().max_diff(&st) < 1e-13);
        }
    }
}
