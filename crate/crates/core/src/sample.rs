//! Seeded sampling of objects, morphisms, complexes and hom elements.
//!
//! All suites draw from ChaCha8 seeded explicitly, so runs with the same
//! (document, seed, bounds) reproduce byte-identically.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::dgcat::{hom_slice, DComplex, DComplexRef, HomElement};
use crate::error::Result;
use crate::rectify::{pair_section_space, DMorphism, DObject};
use crate::ringedspace::{Open, SpaceRef};
use crate::sheaf::{hom_sheaf, Sheaf, SheafMap};
use std::sync::Arc;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_dobject(
    space: &SpaceRef,
    opens: &[Open],
    max_len: usize,
    r: &mut ChaCha8Rng,
) -> DObject {
    let n = r.gen_range(0..=max_len);
    DObject::new(
        space.clone(),
        (0..n)
            .map(|_| opens[r.gen_range(0..opens.len())].clone())
            .collect(),
    )
    .expect("opens are opens")
}

/// Uniform random morphism between two fixed D-objects.
pub fn random_dmorphism_between(
    src: &DObject,
    tgt: &DObject,
    r: &mut ChaCha8Rng,
) -> Result<DMorphism> {
    let space = src.space().clone();
    let p = space.p();
    let mut m = DMorphism::zero(src.clone(), tgt.clone());
    for k in 0..tgt.len() {
        for j in 0..src.len() {
            let sec = pair_section_space(&space, &src.opens()[j], &tgt.opens()[k])?;
            let coords: Vec<u32> = (0..sec.dim()).map(|_| r.gen_range(0..p)).collect();
            m.entries_mut()[k][j] = sec.ambient(&coords);
        }
    }
    DMorphism::new(src.clone(), tgt.clone(), m.entries().clone())
}

pub fn random_dmorphism(
    space: &SpaceRef,
    opens: &[Open],
    max_len: usize,
    r: &mut ChaCha8Rng,
) -> Result<DMorphism> {
    let src = random_dobject(space, opens, max_len, r);
    let tgt = random_dobject(space, opens, max_len, r);
    random_dmorphism_between(&src, &tgt, r)
}

/// Random two-term complex (any morphism works, d^2 = 0 is vacuous).
pub fn random_two_term_complex(
    space: &SpaceRef,
    opens: &[Open],
    max_len: usize,
    lo: i32,
    r: &mut ChaCha8Rng,
) -> Result<DComplex> {
    let d = random_dmorphism(space, opens, max_len, r)?;
    DComplex::new(
        space.clone(),
        lo,
        vec![d.source().clone(), d.target().clone()],
        vec![d],
    )
}

/// Random three-term complex: the second differential is sampled from the
/// kernel of composition with the first.
pub fn random_three_term_complex(
    space: &SpaceRef,
    opens: &[Open],
    max_len: usize,
    lo: i32,
    r: &mut ChaCha8Rng,
) -> Result<DComplex> {
    let p = space.p();
    let x0 = random_dobject(space, opens, max_len, r);
    let x1 = random_dobject(space, opens, max_len, r);
    let x2 = random_dobject(space, opens, max_len, r);
    let d0 = random_dmorphism_between(&x0, &x1, r)?;
    // solve d1 o d0 = 0 in slice coordinates
    let c1 = Arc::new(DComplex::concentrated(x1.clone(), 0));
    let c2 = Arc::new(DComplex::concentrated(x2.clone(), 0));
    let c0 = Arc::new(DComplex::concentrated(x0.clone(), 0));
    let s12 = hom_slice(&c1, &c2, 0)?;
    let s02 = hom_slice(&c0, &c2, 0)?;
    let d0h = HomElement::new(
        c0.clone(),
        c1.clone(),
        0,
        [(0, d0.clone())].into_iter().collect(),
    )?;
    let mut cols = Vec::new();
    for i in 0..s12.dim {
        let b = s12.basis_element(i)?;
        cols.push(s02.coords(&b.compose(&d0h)?)?);
    }
    let m = crate::fp::Matrix::from_cols(p, s02.dim, cols);
    let kernel = m.kernel();
    let coeffs: Vec<u32> = (0..kernel.cols()).map(|_| r.gen_range(0..p)).collect();
    let d1coords = kernel.apply(&coeffs);
    let d1h = s12.element(&d1coords)?;
    let d1 = d1h.component(0);
    DComplex::new(space.clone(), lo, vec![x0, x1, x2], vec![d0, d1])
}

/// Random hom element of a given degree between two complexes.
pub fn random_hom_element(
    e: &DComplexRef,
    f: &DComplexRef,
    degree: i32,
    r: &mut ChaCha8Rng,
) -> Result<HomElement> {
    let p = e.space().p();
    let slice = hom_slice(e, f, degree)?;
    let coords: Vec<u32> = (0..slice.dim).map(|_| r.gen_range(0..p)).collect();
    slice.element(&coords)
}

/// Random sheaf map as a combination of a hom basis.
pub fn random_sheaf_map(m: &Sheaf, n: &Sheaf, r: &mut ChaCha8Rng) -> Result<Option<SheafMap>> {
    let basis = hom_sheaf(m, n)?;
    if basis.is_empty() {
        return Ok(None);
    }
    let p = m.space().p();
    let mut acc = SheafMap::zero(m, n);
    for b in &basis {
        let c = r.gen_range(0..p);
        if c != 0 {
            acc = acc.add(&b.scale(c));
        }
    }
    Ok(Some(acc))
}
