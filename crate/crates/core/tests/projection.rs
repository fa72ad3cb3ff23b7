use cofrag_core::{moment_of, project_initial_condition, MassGrid};

/// Error of the pivot-rule first moment of projected `e^{-x}` on `[a, b]`.
fn first_moment_error(n_cells: usize) -> f64 {
    let (a, b) = (0.01, 50.0);
    let grid = MassGrid::geometric(a, b, n_cells).unwrap();
    let g = project_initial_condition(&grid, |x| (-x).exp()).unwrap();
    let exact = (1.0 + a) * (-a as f64).exp() - (1.0 + b) * (-b as f64).exp();
    (moment_of(&g, &grid, 1.0) - exact).abs()
}

#[test]
fn pivot_moments_converge_at_second_order() {
    let errors: Vec<f64> = [20, 40, 80, 160].iter().map(|&n| first_moment_error(n)).collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio} from {errors:?}");
    }
}

#[test]
fn projected_number_is_exact_for_smooth_data() {
    let grid = MassGrid::geometric(0.01, 50.0, 30).unwrap();
    let g = project_initial_condition(&grid, |x| (-x).exp()).unwrap();
    let exact = (-0.01f64).exp() - (-50.0f64).exp();
    assert!((moment_of(&g, &grid, 0.0) - exact).abs() <= 1e-13);
}
