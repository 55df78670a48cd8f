#![allow(dead_code)]

use vne_core::group::{cyclic, direct_product, symmetric};
use vne_core::{build_diagonal_coupling, build_me_product_coupling, build_wstar_coupling, CouplingRecord, FiniteGroup};

pub fn klein() -> FiniteGroup {
    direct_product(&[cyclic(2).unwrap(), cyclic(2).unwrap()]).unwrap()
}

pub fn z2_cubed() -> FiniteGroup {
    direct_product(&[cyclic(2).unwrap(), cyclic(2).unwrap(), cyclic(2).unwrap()]).unwrap()
}

pub fn z2_z4() -> FiniteGroup {
    direct_product(&[cyclic(2).unwrap(), cyclic(4).unwrap()]).unwrap()
}

/// Diagonal S3, ME Z3 x Z5, W* Z4 vs Klein, and W* pairwise among Z8, Z2 x Z4, (Z2)^3.
pub fn bundled_couplings() -> Vec<CouplingRecord> {
    let z8 = cyclic(8).unwrap();
    vec![
        build_diagonal_coupling(&symmetric(3).unwrap()).unwrap(),
        build_me_product_coupling(&cyclic(3).unwrap(), &cyclic(5).unwrap()).unwrap(),
        build_wstar_coupling(&cyclic(4).unwrap(), &klein(), None).unwrap(),
        build_wstar_coupling(&z8, &z2_z4(), None).unwrap(),
        build_wstar_coupling(&z8, &z2_cubed(), None).unwrap(),
        build_wstar_coupling(&z2_z4(), &z2_cubed(), None).unwrap(),
    ]
}
