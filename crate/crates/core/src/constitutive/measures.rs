//! Scalar equivalent measures for reporting.

use crate::tensor_field::{ScalarField, Tensor2, Tensor2Field};

/// `√(3/2 · dev T : dev T)`. A 2×2 tensor is read as having zero out-of-plane components.
pub fn von_mises(t: &Tensor2) -> f64 {
    let dev = t.embed3(0.0).deviator();
    (1.5 * dev.ddot(&dev.transpose())).sqrt()
}

pub fn equivalent_stress(t: &Tensor2Field) -> ScalarField {
    ScalarField::from_fn(t.shape(), |node| von_mises(&t.get(node)))
}

/// von Mises strain `√(2/3 · dev ε : dev ε)` of `ε = ½ ln(F̄ᵀF̄)`; a 2×2 `F̄` is
/// embedded in plane strain.
pub fn macroscopic_equivalent_strain(fbar: &Tensor2) -> f64 {
    let f = fbar.embed3(1.0);
    let eps = f
        .transpose()
        .dot(&f)
        .ln_sym()
        .expect("macroscopic deformation must be invertible")
        * 0.5;
    let dev = eps.deviator();
    (2.0 / 3.0 * dev.ddot(&dev.transpose())).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spherical_and_uniaxial() {
        assert!(von_mises(&(Tensor2::identity(3) * 4.2)) < 1e-15);
        assert!((von_mises(&Tensor2::diag(&[2.5, 0.0, 0.0])) - 2.5).abs() < 1e-15);
        assert!((von_mises(&Tensor2::diag(&[2.5, 0.0])) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn pure_shear_stretch() {
        // ε = diag(ln λ, -ln λ, 0) is already deviatoric: ε̄ = √(4/3) ln λ.
        let l = 1.2f64;
        let expect = (4.0f64 / 3.0).sqrt() * l.ln();
        let got = macroscopic_equivalent_strain(&Tensor2::diag(&[l, 1.0 / l]));
        assert!((got - expect).abs() < 1e-14);
        assert!((got - 0.2105).abs() < 1e-4);
        assert!(macroscopic_equivalent_strain(&Tensor2::identity(3)) == 0.0);
    }
}
