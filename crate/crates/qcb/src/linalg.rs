//! Dense complex linear algebra shared by the numeric modules.

use nalgebra::{convert, DMatrix, DVector, RealField, SymmetricEigen};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMat<T> = DMatrix<Complex<T>>;
pub type CVec<T> = DVector<Complex<T>>;

pub fn re<T: RealField + Copy>(x: f64) -> T {
    convert(x)
}

pub fn to_f64<T: RealField + Copy>(x: T) -> f64 {
    x.to_subset().unwrap_or(f64::NAN)
}

pub fn cx<T: RealField + Copy>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// Largest singular value; 0 for empty matrices.
pub fn spectral_norm<T: RealField + Copy>(m: &CMat<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    m.singular_values().iter().fold(T::zero(), |a, &b| if b > a { b } else { a })
}

pub fn vec_norm<T: RealField + Copy>(v: &CVec<T>) -> T {
    v.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt()
}

/// ‖M − M*‖.
pub fn hermitian_residual<T: RealField + Copy>(m: &CMat<T>) -> T {
    spectral_norm(&(m - m.adjoint()))
}

pub fn randn_c<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat<f64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::<f64>::from_fn(rows, cols, |_, _| {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        Complex::new(a * s, b * s)
    })
}

pub fn randn_vec<R: Rng>(rng: &mut R, n: usize) -> CVec<f64> {
    let m = randn_c(rng, n, 1);
    CVec::from_iterator(n, m.iter().cloned())
}

/// Random Hermitian matrix with spectral norm of order 1.
pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> CMat<f64> {
    let a = randn_c(rng, n, n);
    (&a + a.adjoint()) * Complex::new(0.5 / (n as f64).sqrt().max(1.0), 0.0)
}

/// Random `rows × cols` isometry (`rows ≥ cols`), W*W = 1.
pub fn random_isometry<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat<f64> {
    assert!(rows >= cols);
    if cols == 0 {
        return CMat::zeros(rows, 0);
    }
    randn_c(rng, rows, cols).qr().q()
}

pub fn to_t<T: RealField + Copy>(m: &CMat<f64>) -> CMat<T> {
    m.map(|z| Complex::new(re::<T>(z.re), re::<T>(z.im)))
}

pub fn vec_to_t<T: RealField + Copy>(v: &CVec<f64>) -> CVec<T> {
    v.map(|z| Complex::new(re::<T>(z.re), re::<T>(z.im)))
}

pub fn diag<T: RealField + Copy>(d: &[T]) -> CMat<T> {
    CMat::from_diagonal(&DVector::from_iterator(d.len(), d.iter().map(|&x| cx(x))))
}

pub fn diag_c<T: RealField + Copy>(d: &[Complex<T>]) -> CMat<T> {
    CMat::from_diagonal(&DVector::from_column_slice(d))
}

/// `e^{itD}` for Hermitian `D`, via the spectral decomposition.
pub fn unitary_flow<T: RealField + Copy>(d: &CMat<T>, t: T) -> CMat<T> {
    let eig = SymmetricEigen::new(d.clone());
    let u = &eig.eigenvectors;
    let ph: Vec<Complex<T>> = eig.eigenvalues.iter().map(|&l| Complex::new((t * l).cos(), (t * l).sin())).collect();
    u * diag_c(&ph) * u.adjoint()
}

/// Top singular pair `(σ, u, v)` with `M v = σ u`.
pub fn top_singular<T: RealField + Copy>(m: &CMat<T>) -> (T, CVec<T>, CVec<T>) {
    let svd = m.clone().svd(true, true);
    let (mut k, mut best) = (0, T::zero());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > best {
            best = s;
            k = i;
        }
    }
    let u = svd.u.unwrap().column(k).into_owned();
    let v = svd.v_t.unwrap().row(k).adjoint();
    (best, u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn isometry_and_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = random_isometry(&mut rng, 7, 3);
        let e = w.adjoint() * &w - CMat::<f64>::identity(3, 3);
        assert!(spectral_norm(&e) < 1e-13);
        assert!((spectral_norm(&w) - 1.0).abs() < 1e-13);
        let h = random_hermitian(&mut rng, 5);
        assert!(hermitian_residual(&h) < 1e-14);
    }

    #[test]
    fn flow_is_unitary_and_top_pair_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random_hermitian(&mut rng, 6);
        let u = unitary_flow(&h, 0.7);
        assert!(spectral_norm(&(u.adjoint() * &u - CMat::<f64>::identity(6, 6))) < 1e-12);
        let m = randn_c(&mut rng, 4, 5);
        let (s, a, b) = top_singular(&m);
        assert!(vec_norm(&(&m * &b - a * Complex::new(s, 0.0))) < 1e-12);
        assert!((s - spectral_norm(&m)).abs() < 1e-12);
    }
}
