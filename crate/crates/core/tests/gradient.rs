use ndarray::Array2;
use rand::Rng;
use ship_core::model::head::{forward, loss, loss_and_gradient, HeadParams};
use ship_core::SeededRng;

fn max_relative_error(params: &HeadParams, x: &Array2<f64>, y: &[usize]) -> f64 {
    let (_, grad) = loss_and_gradient(params, x.view(), y);
    let h = 1e-5;
    let mut p = params.clone();
    let mut worst = 0.0f64;
    for i in 0..p.n_params() {
        let orig = p.get(i);
        *p.get_mut(i) = orig + h;
        let up = loss_and_gradient(&p, x.view(), y).0;
        *p.get_mut(i) = orig - h;
        let down = loss_and_gradient(&p, x.view(), y).0;
        *p.get_mut(i) = orig;
        let numeric = (up - down) / (2.0 * h);
        let analytic = grad.get(i);
        let scale = numeric.abs().max(analytic.abs());
        worst = worst.max(if scale < 1e-7 { (numeric - analytic).abs() } else { (numeric - analytic).abs() / scale });
    }
    worst
}

#[test]
fn analytic_gradient_matches_central_differences() {
    let mut g = SeededRng::new(17).rng();
    for draw in 0..50 {
        let d = g.random_range(1..=6);
        let c = g.random_range(2..=4);
        let params = HeadParams::init(d, [g.random_range(2..=8), g.random_range(2..=8)], c, &SeededRng::new(draw));
        let n = g.random_range(1..=5);
        let x = Array2::from_shape_fn((n, d), |_| g.random_range(-3.0..3.0));
        let y: Vec<usize> = (0..n).map(|_| g.random_range(0..c)).collect();
        let err = max_relative_error(&params, &x, &y);
        assert!(err <= 1e-4, "draw {draw}: relative error {err:.2e}");
    }
}

#[test]
fn batch_loss_is_mean_of_single_losses() {
    let params = HeadParams::init(3, [5, 4], 3, &SeededRng::new(1));
    let rows = [[0.5, -1.0, 2.0], [0.0, 0.3, -0.7]];
    let x = Array2::from_shape_fn((2, 3), |(i, j)| rows[i][j]);
    let y = [2, 0];
    let (l, _) = loss_and_gradient(&params, x.view(), &y);
    let manual = (loss(&forward(&params, &rows[0]).unwrap(), 2) + loss(&forward(&params, &rows[1]).unwrap(), 0)) / 2.0;
    assert!((l - manual).abs() < 1e-12);
}
