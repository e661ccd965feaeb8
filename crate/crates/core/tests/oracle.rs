use mvgamma::corrstruct::*;
use mvgamma::engines::{cdf_one_factorial, EvalPoint};
use mvgamma::linalg::Matrix;
use mvgamma::oracle::*;
use mvgamma::quad::Tolerance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn corr(rows: &[&[f64]]) -> CorrelationMatrix<f64> {
    CorrelationMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

fn random_corr(rng: &mut ChaCha8Rng, n: usize) -> CorrelationMatrix<f64> {
    // Normalized Gram matrix of random vectors.
    let v: Vec<Vec<f64>> = (0..n).map(|_| (0..n + 2).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let g = Matrix::from_fn(n, |i, j| v[i].iter().zip(&v[j]).map(|(a, b)| a * b).sum::<f64>());
    CorrelationMatrix::validate(Matrix::from_fn(n, |i, j| {
        if i == j { 1.0 } else { g[(i, j)] / (g[(i, i)] * g[(j, j)]).sqrt() }
    }))
    .unwrap()
}

fn within(est: &MCEstimate, value: f64, k: f64) {
    assert!(
        (est.mean - value).abs() <= k * est.std_error,
        "{} ± {} vs {value} (z = {:.2})",
        est.mean,
        est.std_error,
        (est.mean - value) / est.std_error
    );
}

#[test]
fn identity_marginal_is_standard_exponential() {
    let batch = sample_chi_square(&CorrelationMatrix::identity(3), 2, DEFAULT_SAMPLES, 1).unwrap();
    within(&mc_cdf(&batch, &[1.0, f64::INFINITY, f64::INFINITY]).unwrap(), 1.0 - (-1.0f64).exp(), 4.0);
    assert_eq!(mc_cdf(&batch, &[0.0; 3]).unwrap().mean, 0.0);
    assert_eq!(mc_cdf(&batch, &[f64::INFINITY; 3]).unwrap().mean, 1.0);
}

#[test]
fn batches_do_not_depend_on_thread_count() {
    let r = corr(&[&[1.0, 0.4, 0.2], &[0.4, 1.0, 0.3], &[0.2, 0.3, 1.0]]);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let b = sample_chi_square(&r, 3, 100_000, 99).unwrap();
            let e = mc_cdf(&b, &[2.0, 3.0, 2.5]).unwrap();
            let mut bytes = Vec::new();
            write_batch(&b, &mut bytes).unwrap();
            let s = sample_one_factorial(&OneFactorialStructure::new(vec![0.3, 0.6]).unwrap(), 0.75, 50_000, 99).unwrap();
            let f = mc_cdf(&s, &[1.0, 0.5]).unwrap();
            (e.mean.to_bits(), e.std_error.to_bits(), bytes, f.mean.to_bits())
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn export_round_trip() {
    let r = corr(&[&[1.0, 0.5], &[0.5, 1.0]]);
    let b = sample_chi_square(&r, 1, 40_000, 4).unwrap();
    let mut bytes = Vec::new();
    write_batch(&b, &mut bytes).unwrap();
    assert_eq!(&bytes[..8], BATCH_MAGIC);
    let cols = read_batch(bytes.as_slice()).unwrap();
    assert_eq!(cols.seed, 4);
    assert_eq!(cols.columns.len(), 2);
    for (k, row) in b.rows().enumerate() {
        assert_eq!(row[0].to_bits(), cols.columns[0][k].to_bits());
        assert_eq!(row[1].to_bits(), cols.columns[1][k].to_bits());
    }
    bytes[0] = b'X';
    assert!(read_batch(bytes.as_slice()).is_err());
}

#[test]
fn laplace_transform_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for nu in [1, 2, 3] {
        let r = random_corr(&mut rng, 4);
        let t = [0.2, 0.5, 0.1, 0.3];
        let alpha = nu as f64 / 2.0;
        let b = sample_chi_square(&r, nu, DEFAULT_SAMPLES, 30 + nu as u64).unwrap();
        within(&mc_laplace(&b, &t).unwrap(), lt_formula(&r, alpha, &t).unwrap(), 4.0);
        assert_eq!(mc_laplace(&b, &[0.0; 4]).unwrap().mean, 1.0);
        assert_eq!(lt_formula(&r, alpha, &[0.0; 4]).unwrap(), 1.0);
    }
    let id = CorrelationMatrix::identity(3);
    let v = lt_formula(&id, 1.3, &[0.2, 0.4, 0.6]).unwrap();
    assert!((v - (1.2f64 * 1.4 * 1.6).powf(-1.3)).abs() < 1e-14);
}

#[test]
fn pairwise_correlation_is_squared_correlation() {
    let r = corr(&[&[1.0, 0.6], &[0.6, 1.0]]);
    let b = sample_chi_square(&r, 2, DEFAULT_SAMPLES, 17).unwrap();
    let j = mc_joint(&b, 5, |row, out| {
        out.copy_from_slice(&[row[0], row[1], row[0] * row[0], row[1] * row[1], row[0] * row[1]]);
    });
    let c = |m: &[f64]| (m[4] - m[0] * m[1]) / ((m[2] - m[0] * m[0]) * (m[3] - m[1] * m[1])).sqrt();
    let value = c(&j.means);
    let grad: Vec<f64> = (0..5)
        .map(|i| {
            let mut up = j.means.clone();
            let mut dn = j.means.clone();
            up[i] += 1e-6;
            dn[i] -= 1e-6;
            (c(&up) - c(&dn)) / 2e-6
        })
        .collect();
    let est = MCEstimate { mean: value, std_error: j.linear_se(&grad), count: j.count, seed: j.seed };
    within(&est, 0.36, 4.0);
}

#[test]
fn one_factorial_sampler_with_zero_loadings() {
    let s = OneFactorialStructure::new(vec![0.0, 0.0]).unwrap();
    let b = sample_one_factorial(&s, 1.7, 200_000, 2).unwrap();
    let g = mvgamma::specfun::gamma_cdf(1.5, 1.7).unwrap();
    within(&mc_cdf(&b, &[1.5, 1.5]).unwrap(), g * g, 4.0);
}

#[test]
fn samplers_agree_at_half_shape() {
    let s = OneFactorialStructure::new(vec![0.5, 0.7, 0.3]).unwrap();
    let x = [0.6, 1.0, 0.4];
    let a = mc_cdf(&sample_one_factorial(&s, 0.5, DEFAULT_SAMPLES, 5).unwrap(), &x).unwrap();
    let b = mc_cdf(&sample_chi_square(&s.assemble().unwrap(), 1, DEFAULT_SAMPLES, 6).unwrap(), &x).unwrap();
    let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    assert!((a.mean - b.mean).abs() < 4.0 * se, "{} vs {}", a.mean, b.mean);
}

#[test]
fn one_factorial_sampler_matches_engine_off_the_half_integers() {
    let s = OneFactorialStructure::new(vec![0.4, 0.6, 0.5]).unwrap();
    let x = [0.8, 1.1, 0.6];
    let v = cdf_one_factorial(&EvalPoint::new(x.to_vec(), 0.75).unwrap(), &s, &Tolerance::default()).unwrap().value;
    let e = mc_cdf(&sample_one_factorial(&s, 0.75, DEFAULT_SAMPLES, 12).unwrap(), &x).unwrap();
    within(&e, v, 3.5);
}

#[test]
fn coupled_path_is_exact_for_equal_ends() {
    let r = corr(&[&[1.0, 0.3, 0.2], &[0.3, 1.0, 0.1], &[0.2, 0.1, 1.0]]);
    let tau = [0.0, 0.25, 0.5, 0.75, 1.0];
    let p = mc_coupled_path(&r, &r, 2, &tau, &[1.0, 1.2, 0.8], 100_000, 3).unwrap();
    let first = p.points[0].as_ref().unwrap().mean;
    for q in &p.points {
        assert_eq!(q.as_ref().unwrap().mean, first);
    }
    for inc in &p.increments {
        let inc = inc.as_ref().unwrap();
        assert_eq!((inc.mean, inc.std_error), (0.0, 0.0));
    }
}

#[test]
fn coupled_path_reverses() {
    let r0 = CorrelationMatrix::identity(3);
    let r1 = corr(&[&[1.0, 0.5, 0.4], &[0.5, 1.0, 0.3], &[0.4, 0.3, 1.0]]);
    let tau = [0.0, 0.25, 0.5, 0.75, 1.0];
    let x = [1.0, 0.7, 1.3];
    let up = mc_coupled_path(&r0, &r1, 1, &tau, &x, 200_000, 8).unwrap();
    let down = mc_coupled_path(&r1, &r0, 1, &tau, &x, 200_000, 8).unwrap();
    for (i, inc) in up.increments.iter().enumerate() {
        let inc = inc.as_ref().unwrap();
        assert!(inc.mean > -3.5 * inc.std_error);
        let rev = down.increments[tau.len() - 2 - i].as_ref().unwrap();
        assert!(rev.mean < 3.5 * rev.std_error);
    }
    let total = up.combination(&[-1.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
    assert!(total.mean > 3.5 * total.std_error, "{total:?}");
    let end = down.points[0].as_ref().unwrap().mean;
    assert_eq!(end, up.points[4].as_ref().unwrap().mean);
}

#[test]
fn sampler_rejects_bad_inputs() {
    let r = CorrelationMatrix::identity(2);
    assert!(sample_chi_square(&r, 0, 10, 1).is_err());
    let b = sample_chi_square(&r, 1, 10, 1).unwrap();
    assert!(mc_cdf(&b, &[1.0]).is_err());
    assert!(mc_laplace(&b, &[-1.0, 0.0]).is_err());
}
