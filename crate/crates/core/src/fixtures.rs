//! Programmatic fixtures shared by the test suites and the CLI bundle:
//! small algebras, spaces, composable map chains, and a few sheaves.

use std::sync::Arc;

use crate::algebra::{AlgebraMap, AlgebraRef, FinAlgebra, FinModule};
use crate::error::Caps;
use crate::fp::Matrix;
use crate::ringedspace::{
    space_from_edges, spec, spec_map, RingedMap, SpaceRef, SpecSpace,
};
use crate::sheaf::Sheaf;
use std::collections::BTreeMap;

pub fn caps() -> Caps {
    Caps::default()
}

pub fn f2() -> AlgebraRef {
    Arc::new(FinAlgebra::from_poly(2, &[0, 1], &caps()).unwrap())
}

/// `F_2[x]/(x^2+x)`, isomorphic to F_2 x F_2.
pub fn f2xf2() -> AlgebraRef {
    Arc::new(FinAlgebra::from_poly(2, &[0, 1, 1], &caps()).unwrap())
}

/// `F_2[t]/(t^2)`, the dual numbers.
pub fn dual_numbers() -> AlgebraRef {
    Arc::new(FinAlgebra::from_poly(2, &[0, 0, 1], &caps()).unwrap())
}

/// `F_4 = F_2[x]/(x^2+x+1)`.
pub fn f4() -> AlgebraRef {
    Arc::new(FinAlgebra::from_poly(2, &[1, 1, 1], &caps()).unwrap())
}

pub fn f3() -> AlgebraRef {
    Arc::new(FinAlgebra::from_poly(3, &[0, 1], &caps()).unwrap())
}

pub fn spec_f2() -> SpecSpace {
    spec(&f2(), &caps()).unwrap()
}

pub fn spec_f2xf2() -> SpecSpace {
    spec(&f2xf2(), &caps()).unwrap()
}

pub fn spec_dual() -> SpecSpace {
    spec(&dual_numbers(), &caps()).unwrap()
}

pub fn spec_f4() -> SpecSpace {
    spec(&f4(), &caps()).unwrap()
}

/// Sierpinski space: closed point "s" (stalk `F_2[t]/(t^2)`) specializing
/// to generic point "eta" (stalk F_2), with t -> 0 along generization.
pub fn sierpinski() -> SpaceRef {
    let r = dual_numbers();
    let k = f2();
    let res =
        AlgebraMap::new(r.clone(), k.clone(), Matrix::from_rows(2, vec![vec![1, 0]])).unwrap();
    space_from_edges(
        vec!["s".into(), "eta".into()],
        &[(0, 1)],
        vec![r, k],
        &[((0, 1), res)],
        &caps(),
    )
    .unwrap()
}

/// Chain poset a <= b <= c with field stalks F_2 and identity res maps.
pub fn chain3() -> SpaceRef {
    let k = f2();
    let id01 = AlgebraMap::identity(&k);
    let id12 = AlgebraMap::identity(&k);
    space_from_edges(
        vec!["a".into(), "b".into(), "c".into()],
        &[(0, 1), (1, 2)],
        vec![k.clone(), k.clone(), k],
        &[((0, 1), id01), ((1, 2), id12)],
        &caps(),
    )
    .unwrap()
}

/// A composable pair g : U -> T, f : T -> S with its composite.
#[derive(Debug, Clone)]
pub struct MapChain {
    pub name: &'static str,
    pub g: RingedMap,
    pub f: RingedMap,
    pub fg: RingedMap,
}

impl MapChain {
    fn new(name: &'static str, f: RingedMap, g: RingedMap) -> Self {
        let fg = f.compose(&g).unwrap();
        MapChain { name, g, f, fg }
    }
}

/// The Spec chain Spec F_2 -> Spec(F_2 x F_2) -> Spec F_2: the first map
/// comes from a projection, the second from the diagonal.
pub fn spec_chain() -> MapChain {
    let a = f2();
    let prod = f2xf2();
    let spec_a = spec(&a, &caps()).unwrap();
    let spec_prod = spec(&prod, &caps()).unwrap();
    let diag = AlgebraMap::new(
        a.clone(),
        prod.clone(),
        Matrix::from_rows(2, vec![vec![1], vec![0]]),
    )
    .unwrap();
    let proj = AlgebraMap::new(
        prod.clone(),
        a.clone(),
        Matrix::from_rows(2, vec![vec![1, 0]]),
    )
    .unwrap();
    let g = spec_map(&proj, &spec_a, &spec_prod).unwrap();
    let f = spec_map(&diag, &spec_prod, &spec_a).unwrap();
    MapChain::new("spec-f2xf2", f, g)
}

/// `Spec F_2 -> Spec F_2[t]/(t^2) -> Spec F_2`, from t -> 0 and the
/// coefficient inclusion.
pub fn dual_chain() -> MapChain {
    let k = f2();
    let r = dual_numbers();
    let spec_k = spec(&k, &caps()).unwrap();
    let spec_r = spec(&r, &caps()).unwrap();
    let quot = AlgebraMap::new(
        r.clone(),
        k.clone(),
        Matrix::from_rows(2, vec![vec![1, 0]]),
    )
    .unwrap();
    let incl = AlgebraMap::new(
        k.clone(),
        r.clone(),
        Matrix::from_rows(2, vec![vec![1], vec![0]]),
    )
    .unwrap();
    let g = spec_map(&quot, &spec_k, &spec_r).unwrap();
    let f = spec_map(&incl, &spec_r, &spec_k).unwrap();
    MapChain::new("spec-dual", f, g)
}

/// Spec F_2 -> Sierpinski -> Spec F_2: include the generic point, then
/// collapse to a point.
pub fn sierpinski_chain() -> MapChain {
    let x = sierpinski();
    let pt = spec_f2().space;
    let k = f2();
    let r = dual_numbers();
    let eta = x.point_index("eta").unwrap();
    let g = RingedMap::new(
        pt.clone(),
        x.clone(),
        vec![eta],
        vec![AlgebraMap::identity(&k)],
    )
    .unwrap();
    let unit_incl = AlgebraMap::new(
        k.clone(),
        r.clone(),
        Matrix::from_rows(2, vec![vec![1], vec![0]]),
    )
    .unwrap();
    let f = RingedMap::new(
        x.clone(),
        pt.clone(),
        vec![0, 0],
        vec![unit_incl, AlgebraMap::identity(&k)],
    )
    .unwrap();
    MapChain::new("sierpinski", f, g)
}

/// Spec F_4 -> Spec F_4 -> Spec F_2, from the Frobenius and the
/// coefficient inclusion. Exercises nontrivial semilinearity.
pub fn f4_chain() -> MapChain {
    let k = f2();
    let q = f4();
    let spec_k = spec(&k, &caps()).unwrap();
    let spec_q = spec(&q, &caps()).unwrap();
    // Frobenius on F_4 = F_2[x]/(x^2+x+1): x -> x^2 = x + 1
    let frob = AlgebraMap::new(
        q.clone(),
        q.clone(),
        Matrix::from_rows(2, vec![vec![1, 1], vec![0, 1]]),
    )
    .unwrap();
    let incl = AlgebraMap::new(
        k.clone(),
        q.clone(),
        Matrix::from_rows(2, vec![vec![1], vec![0]]),
    )
    .unwrap();
    let g = spec_map(&frob, &spec_q, &spec_q).unwrap();
    let f = spec_map(&incl, &spec_q, &spec_k).unwrap();
    MapChain::new("spec-f4", f, g)
}

/// All fixture chains used by the verification suites.
pub fn all_chains() -> Vec<MapChain> {
    vec![spec_chain(), dual_chain(), sierpinski_chain(), f4_chain()]
}

/// Skyscraper F_2 at the closed point of the Sierpinski space: stalk
/// F_2 = R/(t) at s, zero at eta.
pub fn skyscraper_sierpinski() -> Sheaf {
    let x = sierpinski();
    let r = dual_numbers();
    let k = f2();
    let s = x.point_index("s").unwrap();
    let eta = x.point_index("eta").unwrap();
    // R/(t) as an R-module: dim 1, 1 acts as 1, t acts as 0
    let residue = FinModule::new(
        r.clone(),
        1,
        vec![Matrix::identity(2, 1), Matrix::zeros(2, 1, 1)],
    )
    .unwrap();
    let zero = FinModule::zero(k.clone());
    let mut stalks = vec![FinModule::zero(r.clone()); 2];
    stalks[s] = residue;
    stalks[eta] = zero;
    let mut comp = BTreeMap::new();
    comp.insert((s, eta), Matrix::zeros(2, 0, 1));
    Sheaf::new(x, stalks, comp).unwrap()
}

/// Skyscraper F_2 on `Spec F_2[t]/(t^2)`: the residue field in degree 0.
pub fn skyscraper_spec_dual() -> Sheaf {
    let sp = spec_dual();
    let r = sp.space.stalk(0).clone();
    let residue = FinModule::new(
        r,
        1,
        vec![Matrix::identity(2, 1), Matrix::zeros(2, 1, 1)],
    )
    .unwrap();
    Sheaf::new(sp.space.clone(), vec![residue], BTreeMap::new()).unwrap()
}

/// `F_3[x]/(x^2+x)`, isomorphic to F_3 x F_3.
pub fn f3xf3() -> AlgebraRef {
    Arc::new(FinAlgebra::from_poly(3, &[0, 1, 1], &caps()).unwrap())
}

/// `F_3[t]/(t^2)`.
pub fn dual_numbers_f3() -> AlgebraRef {
    Arc::new(FinAlgebra::from_poly(3, &[0, 0, 1], &caps()).unwrap())
}

/// Spec F_3 -> Spec(F_3 x F_3) -> Spec F_3, the odd-characteristic
/// version of the product chain: signs are visible here.
pub fn f3_chain() -> MapChain {
    let a = f3();
    let prod = f3xf3();
    let spec_a = spec(&a, &caps()).unwrap();
    let spec_prod = spec(&prod, &caps()).unwrap();
    let diag = AlgebraMap::new(
        a.clone(),
        prod.clone(),
        Matrix::from_rows(3, vec![vec![1], vec![0]]),
    )
    .unwrap();
    let proj = AlgebraMap::new(
        prod.clone(),
        a.clone(),
        Matrix::from_rows(3, vec![vec![1, 0]]),
    )
    .unwrap();
    let g = spec_map(&proj, &spec_a, &spec_prod).unwrap();
    let f = spec_map(&diag, &spec_prod, &spec_a).unwrap();
    MapChain::new("spec-f3xf3", f, g)
}
