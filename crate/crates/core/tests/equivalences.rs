use vtd::collocation::{march_collocation, CollocationConfig};
use vtd::postprocess::{residual_correction, reverse_postprocess};
use vtd::problem::{ex1, ex2};
use vtd::solution::uniform_mesh;
use vtd::solver::{march, VtdConfig};
use vtd::NewtonSettings;

#[test]
fn lifted_solution_is_the_collocation_solution() {
    let settings = NewtonSettings::default();
    for (r, k) in [(0, 0), (1, 0), (2, 1), (3, 0), (3, 2)] {
        let p = ex1::<f64>().unwrap();
        let mesh = uniform_mesh(&0.0, &10.0, 24).unwrap();
        let sol = march(&VtdConfig::new(r, k), &p, &mesh, &settings).unwrap();
        let lifted = residual_correction(&sol, &p, r, k).unwrap();
        let colloc = march_collocation(CollocationConfig::new(r, k), &p, &mesh, &settings).unwrap();
        let d = lifted.max_difference(&colloc, 9).unwrap();
        assert!(d < 1e-10, "(r,k)=({r},{k}): {d:e}");
    }
}

#[test]
fn reverse_map_undoes_the_lift() {
    let settings = NewtonSettings::default();
    for (r, k) in [(1, 0), (2, 2), (3, 1), (4, 3)] {
        let p = ex2::<f64>().unwrap();
        let mesh = uniform_mesh(&0.0, &1.0, 10).unwrap();
        let sol = march(&VtdConfig::new(r, k), &p, &mesh, &settings).unwrap();
        let lifted = residual_correction(&sol, &p, r, k).unwrap();
        let back = reverse_postprocess(&lifted, r, k).unwrap();
        let d = back.max_difference(&sol, 9).unwrap();
        assert!(d < 1e-11, "(r,k)=({r},{k}): {d:e}");
    }
}
