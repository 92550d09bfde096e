//! Bounded complexes over the rectified direct-sum category, their
//! hom-complexes with the standard differential, shifts and cones,
//! acyclicity and perfectness tests, and degree-zero homotopy classes.
//!
//! Windows are two-sided finite; components outside the window are zero.
//! The hom differential is d(phi) = d_F o phi - (-1)^n phi o d_E, shifts
//! negate the differential once per step, and cones use the standard
//! upper-triangular matrix with -d_E in the corner.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebra::FinModule;
use crate::error::{Error, Result};
use crate::fp::{self, Matrix};
use crate::rectify::{
    block_dmorphism, f_star_morphism, f_star_object, pair_section_space, DMorphism, DObject,
};
use crate::ringedspace::{RingedMap, SpaceRef};
use crate::sheaf::{Sheaf, SheafMap};

pub type DComplexRef = Arc<DComplex>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DComplex {
    space: SpaceRef,
    lo: i32,
    comps: Vec<DObject>,
    diffs: Vec<DMorphism>,
}

impl DComplex {
    pub fn new(space: SpaceRef, lo: i32, comps: Vec<DObject>, diffs: Vec<DMorphism>) -> Result<Self> {
        if comps.is_empty() {
            return Ok(DComplex {
                space,
                lo: 0,
                comps: vec![],
                diffs: vec![],
            });
        }
        if diffs.len() + 1 != comps.len() {
            return Err(Error::Shape("differential count".into()));
        }
        for (i, d) in diffs.iter().enumerate() {
            if d.source() != &comps[i] || d.target() != &comps[i + 1] {
                return Err(Error::Shape(format!("differential {i} endpoints")));
            }
        }
        for i in 0..diffs.len().saturating_sub(1) {
            let dd = diffs[i + 1].compose(&diffs[i])?;
            if !dd.is_zero() {
                return Err(Error::Invariant(format!(
                    "d o d != 0 between degrees {} and {}",
                    lo + i as i32,
                    lo + i as i32 + 2
                )));
            }
        }
        Ok(DComplex {
            space,
            lo,
            comps,
            diffs,
        })
    }

    pub fn zero(space: SpaceRef) -> Self {
        DComplex {
            space,
            lo: 0,
            comps: vec![],
            diffs: vec![],
        }
    }

    /// A single D-object placed in one degree.
    pub fn concentrated(x: DObject, degree: i32) -> Self {
        DComplex {
            space: x.space().clone(),
            lo: degree,
            comps: vec![x],
            diffs: vec![],
        }
    }

    /// Two components and one differential.
    pub fn two_term(lo: i32, d: DMorphism) -> Self {
        DComplex {
            space: d.source().space().clone(),
            lo,
            comps: vec![d.source().clone(), d.target().clone()],
            diffs: vec![d],
        }
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn lo(&self) -> i32 {
        self.lo
    }

    pub fn hi(&self) -> i32 {
        if self.comps.is_empty() {
            self.lo - 1
        } else {
            self.lo + self.comps.len() as i32 - 1
        }
    }

    pub fn is_zero_complex(&self) -> bool {
        self.comps.iter().all(|c| c.is_empty())
    }

    pub fn window(&self) -> std::ops::RangeInclusive<i32> {
        self.lo()..=self.hi()
    }

    pub fn component(&self, n: i32) -> DObject {
        if n < self.lo || n > self.hi() {
            DObject::zero(self.space.clone())
        } else {
            self.comps[(n - self.lo) as usize].clone()
        }
    }

    pub fn differential(&self, n: i32) -> DMorphism {
        let idx = n - self.lo;
        if idx >= 0 && (idx as usize) < self.diffs.len() {
            self.diffs[idx as usize].clone()
        } else {
            DMorphism::zero(self.component(n), self.component(n + 1))
        }
    }

    /// `E[m]`: components reindexed by +m, differential scaled by (-1)^m.
    pub fn shift(&self, m: i32) -> DComplex {
        let p = self.space.p();
        let sign = if m.rem_euclid(2) == 0 {
            1
        } else {
            fp::neg_mod(1, p)
        };
        DComplex {
            space: self.space.clone(),
            lo: self.lo - m,
            comps: self.comps.clone(),
            diffs: self.diffs.iter().map(|d| d.scale(sign)).collect(),
        }
    }

    pub fn realize(&self) -> Result<SheafComplex> {
        let comps: Vec<Sheaf> = self
            .comps
            .iter()
            .map(|c| c.realize().map(|(s, _)| s))
            .collect::<Result<_>>()?;
        let diffs: Vec<SheafMap> = self
            .diffs
            .iter()
            .map(|d| d.realize())
            .collect::<Result<_>>()?;
        SheafComplex::new(self.space.clone(), self.lo, comps, diffs)
    }
}

/// A bounded complex of arbitrary sheaves (used for acyclicity,
/// perfectness and resolution inputs that are not of direct-sum form).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SheafComplex {
    space: SpaceRef,
    lo: i32,
    comps: Vec<Sheaf>,
    diffs: Vec<SheafMap>,
}

impl SheafComplex {
    pub fn new(space: SpaceRef, lo: i32, comps: Vec<Sheaf>, diffs: Vec<SheafMap>) -> Result<Self> {
        if comps.is_empty() {
            return Ok(SheafComplex {
                space,
                lo: 0,
                comps: vec![],
                diffs: vec![],
            });
        }
        if diffs.len() + 1 != comps.len() {
            return Err(Error::Shape("sheaf complex differential count".into()));
        }
        for (i, d) in diffs.iter().enumerate() {
            if d.source() != &comps[i] || d.target() != &comps[i + 1] {
                return Err(Error::Shape(format!("sheaf differential {i} endpoints")));
            }
        }
        for i in 0..diffs.len().saturating_sub(1) {
            if !diffs[i + 1].compose(&diffs[i])?.is_zero() {
                return Err(Error::Invariant("sheaf complex d o d != 0".into()));
            }
        }
        Ok(SheafComplex {
            space,
            lo,
            comps,
            diffs,
        })
    }

    pub fn concentrated(s: Sheaf, degree: i32) -> Self {
        SheafComplex {
            space: s.space().clone(),
            lo: degree,
            comps: vec![s],
            diffs: vec![],
        }
    }

    pub fn zero(space: SpaceRef) -> Self {
        SheafComplex {
            space,
            lo: 0,
            comps: vec![],
            diffs: vec![],
        }
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }
    pub fn lo(&self) -> i32 {
        self.lo
    }
    pub fn hi(&self) -> i32 {
        if self.comps.is_empty() {
            self.lo - 1
        } else {
            self.lo + self.comps.len() as i32 - 1
        }
    }

    pub fn component(&self, n: i32) -> Sheaf {
        if n < self.lo || n > self.hi() {
            Sheaf::zero(self.space.clone())
        } else {
            self.comps[(n - self.lo) as usize].clone()
        }
    }

    pub fn differential(&self, n: i32) -> SheafMap {
        let idx = n - self.lo;
        if idx >= 0 && (idx as usize) < self.diffs.len() {
            self.diffs[idx as usize].clone()
        } else {
            SheafMap::zero(&self.component(n), &self.component(n + 1))
        }
    }

    /// The stalk complex at a point: dims and differential matrices for
    /// degrees lo..=hi.
    pub fn stalk_complex(&self, x: usize) -> (Vec<usize>, Vec<Matrix>) {
        let dims = self.comps.iter().map(|c| c.stalk_dim(x)).collect();
        let mats = self
            .diffs
            .iter()
            .map(|d| d.component(x).clone())
            .collect();
        (dims, mats)
    }
}

/// Homology dimensions of a finite complex of F_p spaces given by
/// consecutive matrices (`mats[i]` maps space i to space i+1).
pub fn homology_dims(dims: &[usize], mats: &[Matrix]) -> Vec<usize> {
    let n = dims.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let rank_out = if i < mats.len() { mats[i].rank() } else { 0 };
        let rank_in = if i > 0 { mats[i - 1].rank() } else { 0 };
        out.push(dims[i] - rank_out - rank_in);
    }
    out
}

#[derive(Debug, Clone)]
pub struct AcyclicityReport {
    pub acyclic: bool,
    /// homology dimensions per (point, degree), degrees lo..=hi
    pub homology: BTreeMap<(usize, i32), usize>,
}

/// Exactness on finite Alexandrov spaces is stalkwise; a complex is
/// acyclic iff all stalk homology vanishes.
pub fn is_acyclic_sheaf(sc: &SheafComplex) -> AcyclicityReport {
    let mut homology = BTreeMap::new();
    let mut acyclic = true;
    for x in 0..sc.space.n_points() {
        let (dims, mats) = sc.stalk_complex(x);
        for (i, h) in homology_dims(&dims, &mats).iter().enumerate() {
            homology.insert((x, sc.lo + i as i32), *h);
            if *h != 0 {
                acyclic = false;
            }
        }
    }
    AcyclicityReport { acyclic, homology }
}

pub fn is_acyclic(e: &DComplex) -> Result<AcyclicityReport> {
    Ok(is_acyclic_sheaf(&e.realize()?))
}

/// A degree-n element of the hom complex: a family of component maps
/// phi^p : E^p -> F^{p+n}, finitely many nonzero. Zero components are
/// pruned so equality is canonical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomElement {
    source: DComplexRef,
    target: DComplexRef,
    degree: i32,
    comps: BTreeMap<i32, DMorphism>,
}

impl HomElement {
    pub fn new(
        source: DComplexRef,
        target: DComplexRef,
        degree: i32,
        comps: BTreeMap<i32, DMorphism>,
    ) -> Result<Self> {
        for (p, m) in &comps {
            if m.source() != &source.component(*p) || m.target() != &target.component(p + degree) {
                return Err(Error::Shape(format!("hom component at degree {p}")));
            }
        }
        let comps = comps.into_iter().filter(|(_, m)| !m.is_zero()).collect();
        Ok(HomElement {
            source,
            target,
            degree,
            comps,
        })
    }

    pub fn zero(source: DComplexRef, target: DComplexRef, degree: i32) -> Self {
        HomElement {
            source,
            target,
            degree,
            comps: BTreeMap::new(),
        }
    }

    pub fn identity(e: &DComplexRef) -> Self {
        let mut comps = BTreeMap::new();
        for n in e.window() {
            let c = e.component(n);
            let m = DMorphism::identity(&c);
            if !m.is_zero() {
                comps.insert(n, m);
            }
        }
        HomElement {
            source: e.clone(),
            target: e.clone(),
            degree: 0,
            comps,
        }
    }

    pub fn source(&self) -> &DComplexRef {
        &self.source
    }
    pub fn target(&self) -> &DComplexRef {
        &self.target
    }
    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn component(&self, p: i32) -> DMorphism {
        self.comps.get(&p).cloned().unwrap_or_else(|| {
            DMorphism::zero(self.source.component(p), self.target.component(p + self.degree))
        })
    }

    pub fn nonzero_degrees(&self) -> Vec<i32> {
        self.comps.keys().copied().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn add(&self, other: &HomElement) -> HomElement {
        assert_eq!(self.degree, other.degree);
        assert_eq!(self.source, other.source);
        assert_eq!(self.target, other.target);
        let mut comps = self.comps.clone();
        for (p, m) in &other.comps {
            let entry = comps
                .entry(*p)
                .or_insert_with(|| {
                    DMorphism::zero(
                        self.source.component(*p),
                        self.target.component(p + self.degree),
                    )
                });
            *entry = entry.add(m);
        }
        comps.retain(|_, m| !m.is_zero());
        HomElement {
            source: self.source.clone(),
            target: self.target.clone(),
            degree: self.degree,
            comps,
        }
    }

    pub fn scale(&self, c: u32) -> HomElement {
        let mut comps: BTreeMap<i32, DMorphism> = self
            .comps
            .iter()
            .map(|(p, m)| (*p, m.scale(c)))
            .collect();
        comps.retain(|_, m| !m.is_zero());
        HomElement {
            source: self.source.clone(),
            target: self.target.clone(),
            degree: self.degree,
            comps,
        }
    }

    pub fn neg(&self) -> HomElement {
        self.scale(fp::neg_mod(1, self.source.space().p()))
    }

    pub fn sub(&self, other: &HomElement) -> HomElement {
        self.add(&other.neg())
    }

    /// Composition (no signs; signs live in the differential).
    pub fn compose(&self, other: &HomElement) -> Result<HomElement> {
        if other.target != self.source {
            return Err(Error::BaseMismatch("hom elements in composition"));
        }
        let degree = self.degree + other.degree;
        let mut comps = BTreeMap::new();
        for (p, m1) in &other.comps {
            let q = p + other.degree;
            if let Some(m2) = self.comps.get(&q) {
                let c = m2.compose(m1)?;
                if !c.is_zero() {
                    comps.insert(*p, c);
                }
            }
        }
        HomElement::new(other.source.clone(), self.target.clone(), degree, comps)
    }

    /// d(phi) = d_F o phi - (-1)^n phi o d_E.
    pub fn differential(&self) -> HomElement {
        let p_char = self.source.space().p();
        let n = self.degree;
        let sign = if n.rem_euclid(2) == 0 {
            fp::neg_mod(1, p_char)
        } else {
            1
        };
        let mut comps: BTreeMap<i32, DMorphism> = BTreeMap::new();
        let mut add_term = |p: i32, m: DMorphism| {
            if m.is_zero() {
                return;
            }
            match comps.get_mut(&p) {
                Some(e) => *e = e.add(&m),
                None => {
                    comps.insert(p, m);
                }
            }
        };
        for (p, m) in &self.comps {
            // d_F o phi^p
            let df = self.target.differential(p + n);
            add_term(*p, df.compose(m).expect("shapes match"));
            // -(-1)^n phi^{p+1} o d_E^p  contributes at degree p
        }
        // the second term ranges over p where phi^{p+1} is nonzero
        for (p1, m) in &self.comps {
            let p = p1 - 1;
            let de = self.source.differential(p);
            let term = m.compose(&de).expect("shapes match").scale(sign);
            add_term(p, term);
        }
        comps.retain(|_, m| !m.is_zero());
        HomElement {
            source: self.source.clone(),
            target: self.target.clone(),
            degree: n + 1,
            comps,
        }
    }

    pub fn is_cocycle(&self) -> bool {
        self.differential().is_zero()
    }

}

/// The cone of a degree-0 cocycle phi : E -> F, with the structure maps
/// used by the triangle and by the quotient construction:
/// i_f : F -> C (cocycle), q : C -> E degree +1 (cocycle),
/// p_f : C -> F (d p_f = -(s o q)), j : E -> C degree -1 (d j = i_f o s).
#[derive(Debug, Clone)]
pub struct ConeData {
    pub cone: DComplexRef,
    pub include_target: HomElement,
    pub project_source: HomElement,
    pub project_target: HomElement,
    pub include_source: HomElement,
}

pub fn cone(phi: &HomElement) -> Result<ConeData> {
    if phi.degree() != 0 {
        return Err(Error::NotCocycle);
    }
    if !phi.is_cocycle() {
        return Err(Error::NotCocycle);
    }
    let e = phi.source().clone();
    let f = phi.target().clone();
    let space = e.space().clone();
    let lo = (f.lo()).min(e.lo() - 1);
    let hi = (f.hi()).max(e.hi() - 1);
    if hi < lo {
        // both zero
        let c = Arc::new(DComplex::zero(space));
        return Ok(ConeData {
            cone: c.clone(),
            include_target: HomElement::zero(Arc::new(DComplex::zero(f.space().clone())), c.clone(), 0),
            project_source: HomElement::zero(c.clone(), e.clone(), 1),
            project_target: HomElement::zero(c.clone(), f.clone(), 0),
            include_source: HomElement::zero(e.clone(), c.clone(), -1),
        });
    }
    let mut comps = Vec::new();
    for n in lo..=hi {
        comps.push(f.component(n).concat(&e.component(n + 1)));
    }
    let mut diffs = Vec::new();
    for n in lo..hi {
        let df = f.differential(n);
        let de_neg = e.differential(n + 1).neg();
        let ph = phi.component(n + 1);
        let f_n = f.component(n);
        let e_n1 = e.component(n + 1);
        let f_n1 = f.component(n + 1);
        let e_n2 = e.component(n + 2);
        // block matrix [[d_F, phi], [0, -d_E]]
        diffs.push(block_dmorphism(
            &[&f_n, &e_n1],
            &[&f_n1, &e_n2],
            &[vec![Some(&df), Some(&ph)], vec![None, Some(&de_neg)]],
        )?);
    }
    let c = Arc::new(DComplex::new(space.clone(), lo, comps, diffs)?);

    // structure maps
    let mut inc_f = BTreeMap::new();
    let mut proj_e = BTreeMap::new();
    let mut proj_f = BTreeMap::new();
    let mut inc_e = BTreeMap::new();
    for n in lo..=hi {
        let f_n = f.component(n);
        let e_n1 = e.component(n + 1);
        let id_f = DMorphism::identity(&f_n);
        let id_e = DMorphism::identity(&e_n1);
        // i_F at n: F^n -> C^n = F^n (+) E^{n+1}
        inc_f.insert(
            n,
            block_dmorphism(&[&f_n], &[&f_n, &e_n1], &[vec![Some(&id_f)], vec![None]])?,
        );
        // q at n: C^n -> E^{n+1}
        proj_e.insert(
            n,
            block_dmorphism(&[&f_n, &e_n1], &[&e_n1], &[vec![None, Some(&id_e)]])?,
        );
        // p_F at n: C^n -> F^n
        proj_f.insert(
            n,
            block_dmorphism(&[&f_n, &e_n1], &[&f_n], &[vec![Some(&id_f), None]])?,
        );
        // j at n+1: E^{n+1} -> C^n
        inc_e.insert(
            n + 1,
            block_dmorphism(&[&e_n1], &[&f_n, &e_n1], &[vec![None], vec![Some(&id_e)]])?,
        );
    }
    let include_target = HomElement::new(f.clone(), c.clone(), 0, inc_f)?;
    let project_source = HomElement::new(c.clone(), e.clone(), 1, proj_e)?;
    let project_target = HomElement::new(c.clone(), f.clone(), 0, proj_f)?;
    let include_source = HomElement::new(e.clone(), c.clone(), -1, inc_e)?;
    Ok(ConeData {
        cone: c,
        include_target,
        project_source,
        project_target,
        include_source,
    })
}

/// One graded piece of the hom complex, with a fixed basis: coordinates
/// are concatenated section-space coordinates over (degree, target index,
/// source index) triples.
#[derive(Debug, Clone)]
pub struct HomSlice {
    pub source: DComplexRef,
    pub target: DComplexRef,
    pub degree: i32,
    layout: Vec<SliceEntry>,
    pub dim: usize,
}

#[derive(Debug, Clone)]
struct SliceEntry {
    p: i32,
    k: usize,
    j: usize,
    sec: crate::sheaf::SectionSpace,
    offset: usize,
}

pub fn hom_slice(e: &DComplexRef, f: &DComplexRef, n: i32) -> Result<HomSlice> {
    if e.space() != f.space() {
        return Err(Error::BaseMismatch("complex base spaces"));
    }
    let space = e.space().clone();
    let mut layout = Vec::new();
    let mut offset = 0usize;
    for p in e.window() {
        let ep = e.component(p);
        let fpn = f.component(p + n);
        for k in 0..fpn.len() {
            for j in 0..ep.len() {
                let sec = pair_section_space(&space, &ep.opens()[j], &fpn.opens()[k])?;
                let d = sec.dim();
                layout.push(SliceEntry {
                    p,
                    k,
                    j,
                    sec,
                    offset,
                });
                offset += d;
            }
        }
    }
    Ok(HomSlice {
        source: e.clone(),
        target: f.clone(),
        degree: n,
        layout,
        dim: offset,
    })
}

impl HomSlice {
    pub fn coords(&self, phi: &HomElement) -> Result<Vec<u32>> {
        if phi.source() != &self.source || phi.target() != &self.target || phi.degree() != self.degree
        {
            return Err(Error::Shape("hom element does not match slice".into()));
        }
        let mut out = vec![0u32; self.dim];
        for entry in &self.layout {
            let m = phi.component(entry.p);
            let e = m.entry(entry.k, entry.j);
            let coords = entry
                .sec
                .express(e)
                .ok_or_else(|| Error::Internal("entry is not a section".into()))?;
            out[entry.offset..entry.offset + coords.len()].copy_from_slice(&coords);
        }
        Ok(out)
    }

    pub fn element(&self, coords: &[u32]) -> Result<HomElement> {
        let mut per_degree: BTreeMap<i32, DMorphism> = BTreeMap::new();
        for entry in &self.layout {
            let d = entry.sec.dim();
            let c = &coords[entry.offset..entry.offset + d];
            let amb = entry.sec.ambient(c);
            let m = per_degree.entry(entry.p).or_insert_with(|| {
                DMorphism::zero(
                    self.source.component(entry.p),
                    self.target.component(entry.p + self.degree),
                )
            });
            m.entries_mut()[entry.k][entry.j] = amb;
        }
        HomElement::new(
            self.source.clone(),
            self.target.clone(),
            self.degree,
            per_degree,
        )
    }

    pub fn basis_element(&self, i: usize) -> Result<HomElement> {
        let mut coords = vec![0u32; self.dim];
        coords[i] = 1;
        self.element(&coords)
    }

    /// Matrix of the hom differential from this slice to the next.
    pub fn differential_matrix(&self, next: &HomSlice) -> Result<Matrix> {
        let p = self.source.space().p();
        let mut cols = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let b = self.basis_element(i)?;
            cols.push(next.coords(&b.differential())?);
        }
        Ok(Matrix::from_cols(p, next.dim, cols))
    }
}

/// Degree-zero cocycles modulo coboundaries, with class representatives.
#[derive(Debug)]
pub struct H0Hom {
    pub slice_prev: HomSlice,
    pub slice0: HomSlice,
    pub slice_next: HomSlice,
    /// columns: basis of Z^0 in slice-0 coordinates
    pub cocycles: Matrix,
    /// quotient of Z^0 coordinates by boundaries
    pub quotient: fp::Quotient,
    pub dim: usize,
    pub reps: Vec<HomElement>,
}

pub fn h0_hom(e: &DComplexRef, f: &DComplexRef) -> Result<H0Hom> {
    let slice_prev = hom_slice(e, f, -1)?;
    let slice0 = hom_slice(e, f, 0)?;
    let slice_next = hom_slice(e, f, 1)?;
    let d0 = slice0.differential_matrix(&slice_next)?;
    let d_prev = slice_prev.differential_matrix(&slice0)?;
    let cocycles = d0.kernel();
    // boundaries inside cocycle coordinates
    let mut boundary_cols = Vec::new();
    for c in 0..d_prev.cols() {
        let b = d_prev.column(c);
        let coords = cocycles
            .coords_of(&b)
            .ok_or_else(|| Error::Internal("boundary is not a cocycle".into()))?;
        boundary_cols.push(coords);
    }
    let p = e.space().p();
    let boundaries = Matrix::from_cols(p, cocycles.cols(), boundary_cols);
    let quotient = fp::quotient_by_span(p, cocycles.cols(), &boundaries);
    let mut reps = Vec::new();
    for i in 0..quotient.dim {
        let mut qcoords = vec![0u32; quotient.dim];
        qcoords[i] = 1;
        let zcoords = quotient.section.apply(&qcoords);
        let coords = cocycles.apply(&zcoords);
        reps.push(slice0.element(&coords)?);
    }
    let dim = quotient.dim;
    Ok(H0Hom {
        slice_prev,
        slice0,
        slice_next,
        cocycles,
        quotient,
        dim,
        reps,
    })
}

impl H0Hom {
    /// Class of a degree-0 cocycle in quotient coordinates.
    pub fn class_of(&self, phi: &HomElement) -> Result<Vec<u32>> {
        let coords = self.slice0.coords(phi)?;
        let z = self
            .cocycles
            .coords_of(&coords)
            .ok_or(Error::NotCocycle)?;
        Ok(self.quotient.proj.apply(&z))
    }
}

/// Apply the rectified pullback degreewise to a complex.
pub fn apply_f_star(f: &RingedMap, e: &DComplex) -> Result<DComplex> {
    let comps: Vec<DObject> = e
        .comps
        .iter()
        .map(|c| f_star_object(f, c))
        .collect::<Result<_>>()?;
    let diffs: Vec<DMorphism> = e
        .diffs
        .iter()
        .map(|d| f_star_morphism(f, d))
        .collect::<Result<_>>()?;
    DComplex::new(f.source().clone(), e.lo, comps, diffs)
}

/// Apply the rectified pullback to a hom element, degreewise.
pub fn apply_f_star_hom(
    f: &RingedMap,
    phi: &HomElement,
    src_star: &DComplexRef,
    tgt_star: &DComplexRef,
) -> Result<HomElement> {
    let mut comps = BTreeMap::new();
    for p in phi.nonzero_degrees() {
        comps.insert(p, f_star_morphism(f, &phi.component(p))?);
    }
    HomElement::new(src_star.clone(), tgt_star.clone(), phi.degree(), comps)
}

/// Perfectness verdict for a realized complex.
#[derive(Debug, Clone)]
pub enum Perfectness {
    Perfect {
        /// free ranks of the witness complex per point, by degree
        witnesses: Vec<BTreeMap<i32, usize>>,
    },
    NotPerfectWithinDepth {
        point: usize,
        depth: usize,
        syzygy_repeats: bool,
    },
}

impl Perfectness {
    pub fn is_perfect(&self) -> bool {
        matches!(self, Perfectness::Perfect { .. })
    }
}

/// Decide perfectness stalkwise by iterated minimal free approximation
/// over each (local factor of each) stalk algebra, up to `depth` syzygy
/// steps below the window.
pub fn is_perfect(sc: &SheafComplex, depth: usize) -> Result<Perfectness> {
    let caps = crate::error::Caps::default();
    let mut witnesses = Vec::new();
    for x in 0..sc.space().n_points() {
        let alg = sc.space().stalk(x).clone();
        let modules: Vec<FinModule> = (sc.lo()..=sc.hi())
            .map(|n| sc.component(n).stalk(x).clone())
            .collect();
        let maps: Vec<Matrix> = (sc.lo()..sc.hi())
            .map(|n| sc.differential(n).component(x).clone())
            .collect();
        // decompose over the primitive idempotents of the stalk algebra
        let prims = alg.primitive_idempotents(&caps)?;
        let mut point_ranks: BTreeMap<i32, usize> = BTreeMap::new();
        for e_idem in &prims {
            let me = alg.left_mul_matrix(e_idem);
            let factor_basis = me.image_basis();
            let (factor, _) = alg.subalgebra(&factor_basis, e_idem, &caps)?;
            // component modules over the factor
            let mut fmods = Vec::new();
            let mut fmaps = Vec::new();
            for (i, m) in modules.iter().enumerate() {
                let em_basis = m.act(e_idem).image_basis();
                let dim = em_basis.cols();
                let mut action = Vec::new();
                for b in 0..factor.dim() {
                    let amb_elt = factor_basis.column(b);
                    let moved = m.act(&amb_elt).mul(&em_basis);
                    let inner = em_basis.solve_matrix(&moved).ok_or_else(|| {
                        Error::Internal("idempotent block not action-invariant".into())
                    })?;
                    action.push(inner);
                }
                let fm = FinModule::new(factor.clone(), dim, action)?;
                if i > 0 {
                    let prev_basis = modules[i - 1].act(e_idem).image_basis();
                    let moved = maps[i - 1].mul(&prev_basis);
                    let mat = em_basis
                        .solve_matrix(&moved)
                        .ok_or_else(|| Error::Internal("differential not block-diagonal".into()))?;
                    fmaps.push(mat);
                }
                fmods.push(fm);
            }
            match resolve_stalk_complex(&factor, &fmods, &fmaps, sc.lo(), depth)? {
                StalkResolution::Complete { ranks } => {
                    for (d, r) in ranks {
                        *point_ranks.entry(d).or_insert(0) += r;
                    }
                }
                StalkResolution::DepthLimited { syzygy_repeats } => {
                    return Ok(Perfectness::NotPerfectWithinDepth {
                        point: x,
                        depth,
                        syzygy_repeats,
                    });
                }
            }
        }
        witnesses.push(point_ranks);
    }
    Ok(Perfectness::Perfect { witnesses })
}

enum StalkResolution {
    Complete { ranks: BTreeMap<i32, usize> },
    DepthLimited { syzygy_repeats: bool },
}

/// Minimal generators of a module over a local algebra: lift a residue
/// basis of M / rad M (greedy, deterministic).
fn minimal_generators(local: &crate::algebra::AlgebraRef, m: &FinModule) -> Vec<Vec<u32>> {
    if m.dim() == 0 {
        return vec![];
    }
    let p = local.p();
    let rad = local.nilradical();
    // rad M = span of rad-basis action images
    let mut rad_cols: Vec<Vec<u32>> = Vec::new();
    for c in 0..rad.cols() {
        let act = m.act(&rad.column(c));
        for j in 0..m.dim() {
            rad_cols.push(act.column(j));
        }
    }
    let rad_span = Matrix::from_cols(p, m.dim(), rad_cols);
    let quot = fp::quotient_by_span(p, m.dim(), &rad_span);
    // greedy: pick basis vectors whose residues are independent over the
    // residue field = module-span independence since rad acts as zero
    let mut chosen: Vec<Vec<u32>> = Vec::new();
    let mut span_cols: Vec<Vec<u32>> = Vec::new();
    for i in 0..m.dim() {
        let mut v = vec![0u32; m.dim()];
        v[i] = 1;
        let res = quot.proj.apply(&v);
        let span = Matrix::from_cols(p, quot.dim, span_cols.clone());
        if span.coords_of(&res).is_none() {
            chosen.push(v.clone());
            // k'-span: add all residue-field multiples = module action images
            for b in 0..local.dim() {
                let img = quot.proj.apply(&m.act(&local.basis_vec(b)).apply(&v));
                span_cols.push(img);
            }
        }
        if Matrix::from_cols(p, quot.dim, span_cols.clone()).rank() == quot.dim {
            break;
        }
    }
    chosen
}

/// Build a minimal free approximation of a bounded stalk complex over a
/// local algebra, descending until it terminates or depth is exhausted.
fn resolve_stalk_complex(
    local: &crate::algebra::AlgebraRef,
    comps: &[FinModule],
    maps: &[Matrix],
    lo: i32,
    depth: usize,
) -> Result<StalkResolution> {
    let p = local.p();
    let hi = lo + comps.len() as i32 - 1;
    let comp = |n: i32| -> FinModule {
        if n < lo || n > hi || comps.is_empty() {
            FinModule::zero(local.clone())
        } else {
            comps[(n - lo) as usize].clone()
        }
    };
    let dmat = |n: i32| -> Matrix {
        let idx = n - lo;
        if idx >= 0 && (idx as usize) < maps.len() {
            maps[idx as usize].clone()
        } else {
            Matrix::zeros(p, comp(n + 1).dim(), comp(n).dim())
        }
    };
    if comps.iter().all(|m| m.dim() == 0) {
        return Ok(StalkResolution::Complete {
            ranks: BTreeMap::new(),
        });
    }
    // state: free ranks, d_F matrices, chain map components to E
    let mut ranks: BTreeMap<i32, usize> = BTreeMap::new();
    let mut free_d: BTreeMap<i32, Matrix> = BTreeMap::new(); // d^n : F^n -> F^{n+1}
    let mut chain: BTreeMap<i32, Matrix> = BTreeMap::new(); // f^n : F^n -> E^n
    let free_dim = |ranks: &BTreeMap<i32, usize>, n: i32| -> usize {
        ranks.get(&n).copied().unwrap_or(0) * local.dim()
    };
    let mut prev_pullback: Option<FinModule> = None;
    let mut n = hi;
    let floor = lo - depth as i32;
    loop {
        // pullback P = {(a, b) in Z^{n+1}(F) x E^n : f(a) = d_E(b)}
        let fdim_n1 = free_dim(&ranks, n + 1);
        let e_n = comp(n);
        let amb_dim = fdim_n1 + e_n.dim();
        // equations: d_F(a) = 0 and f(a) - d_E(b) = 0
        let d_f_n1 = free_d
            .get(&(n + 1))
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(p, free_dim(&ranks, n + 2), fdim_n1));
        let f_n1 = chain
            .get(&(n + 1))
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(p, comp(n + 1).dim(), fdim_n1));
        let de_n = dmat(n);
        let rows_top = d_f_n1.hstack(&Matrix::zeros(p, d_f_n1.rows(), e_n.dim()));
        let rows_bot = f_n1.hstack(&de_n.neg());
        let sys = rows_top.vstack(&rows_bot);
        let kernel = sys.kernel();
        // P as a module: ambient F^{n+1} x E^n with diagonal action
        let free_mod_n1 = FinModule::free(local.clone(), ranks.get(&(n + 1)).copied().unwrap_or(0));
        let mut action = Vec::new();
        for b in 0..local.dim() {
            let bv = local.basis_vec(b);
            let mut big = Matrix::zeros(p, amb_dim, amb_dim);
            big.put_block(0, 0, &free_mod_n1.act(&bv));
            big.put_block(fdim_n1, fdim_n1, &e_n.act(&bv));
            let moved = big.mul(&kernel);
            let inner = kernel
                .solve_matrix(&moved)
                .ok_or_else(|| Error::Internal("pullback not action-invariant".into()))?;
            action.push(inner);
        }
        let pullback = FinModule::new(local.clone(), kernel.cols(), action)?;
        if n < lo {
            if pullback.dim() == 0 {
                return Ok(StalkResolution::Complete { ranks });
            }
            if let Some(prev) = &prev_pullback {
                if modules_isomorphic(prev, &pullback) {
                    return Ok(StalkResolution::DepthLimited {
                        syzygy_repeats: true,
                    });
                }
            }
            prev_pullback = Some(pullback.clone());
        }
        if n < floor {
            return Ok(StalkResolution::DepthLimited {
                syzygy_repeats: false,
            });
        }
        // minimal cover of P by a free module
        let gens = minimal_generators(local, &pullback);
        let r = gens.len();
        ranks.insert(n, r);
        // cover matrix: free^r (ambient dim r*dimL) -> kernel coords;
        // generator i, algebra basis b -> b . gens[i]
        let mut cover = Matrix::zeros(p, pullback.dim(), r * local.dim());
        for (i, g) in gens.iter().enumerate() {
            for b in 0..local.dim() {
                let img = pullback.act(&local.basis_vec(b)).apply(g);
                for (row, &v) in img.iter().enumerate() {
                    cover.set(row, i * local.dim() + b, v);
                }
            }
        }
        // d_F^n = pr_1 o kernel o cover ; f^n = pr_2 o kernel o cover
        let amb_cover = kernel.mul(&cover);
        let d_new = amb_cover.block(0, 0, fdim_n1, amb_cover.cols());
        let f_new = amb_cover.block(fdim_n1, 0, e_n.dim(), amb_cover.cols());
        free_d.insert(n, d_new);
        chain.insert(n, f_new);
        n -= 1;
    }
}

/// Module isomorphism test by searching for an invertible equivariant
/// map; bounded enumeration, sound positives only.
pub fn modules_isomorphic(m: &FinModule, n: &FinModule) -> bool {
    if m.dim() != n.dim() {
        return false;
    }
    if m.dim() == 0 {
        return true;
    }
    let Ok(homs) = crate::algebra::hom_modules(m, n) else {
        return false;
    };
    let p = m.algebra().p();
    let k = homs.len();
    if k == 0 {
        return false;
    }
    if (p as u64).saturating_pow(k as u32) > 1 << 16 {
        return false;
    }
    for coeffs in fp::all_vectors(p, k) {
        if fp::vec_is_zero(&coeffs) {
            continue;
        }
        let mut mat = Matrix::zeros(p, n.dim(), m.dim());
        for (i, c) in coeffs.iter().enumerate() {
            if *c != 0 {
                mat = mat.add(&homs[i].matrix().scale(*c));
            }
        }
        if mat.is_invertible() {
            return true;
        }
    }
    false
}

/// Per-point Euler characteristics computed from homology dimensions.
pub fn euler_characteristics(sc: &SheafComplex) -> Vec<i64> {
    (0..sc.space().n_points())
        .map(|x| {
            let (dims, mats) = sc.stalk_complex(x);
            homology_dims(&dims, &mats)
                .iter()
                .enumerate()
                .map(|(i, h)| {
                    let sign = if (sc.lo() + i as i32).rem_euclid(2) == 0 {
                        1i64
                    } else {
                        -1i64
                    };
                    sign * *h as i64
                })
                .sum()
        })
        .collect()
}

/// Mapping cone of a chain map between sheaf complexes given degreewise,
/// used for quasi-isomorphism verification.
pub fn sheaf_mapping_cone(
    src: &SheafComplex,
    tgt: &SheafComplex,
    chain: &BTreeMap<i32, SheafMap>,
) -> Result<SheafComplex> {
    let space = src.space().clone();
    let p = space.p();
    let lo = tgt.lo().min(src.lo() - 1);
    let hi = tgt.hi().max(src.hi() - 1);
    if hi < lo {
        return Ok(SheafComplex::zero(space));
    }
    let mut comps = Vec::new();
    for n in lo..=hi {
        let parts = [tgt.component(n), src.component(n + 1)];
        let (sum, _) = Sheaf::direct_sum(&parts)?;
        comps.push(sum);
    }
    let mut diffs = Vec::new();
    for n in lo..hi {
        let idx = (n - lo) as usize;
        let t_n = tgt.component(n);
        let s_n1 = src.component(n + 1);
        let dt = tgt.differential(n);
        let ds = src.differential(n + 1);
        let zero_chain = SheafMap::zero(&src.component(n + 1), &tgt.component(n + 1));
        let ch = chain.get(&(n + 1)).unwrap_or(&zero_chain);
        let mut comps_m = Vec::new();
        for x in 0..space.n_points() {
            let rows = comps[idx + 1].stalk_dim(x);
            let cols = comps[idx].stalk_dim(x);
            let mut m = Matrix::zeros(p, rows, cols);
            let (rt, _rs) = (tgt.component(n + 1).stalk_dim(x), src.component(n + 2).stalk_dim(x));
            let (ct, _cs) = (t_n.stalk_dim(x), s_n1.stalk_dim(x));
            m.put_block(0, 0, dt.component(x));
            m.put_block(0, ct, ch.component(x));
            m.put_block(rt, ct, &ds.component(x).scale(fp::neg_mod(1, p)));
            comps_m.push(m);
        }
        diffs.push(SheafMap::new(comps[idx].clone(), comps[idx + 1].clone(), comps_m)?);
    }
    SheafComplex::new(space, lo, comps, diffs)
}


/// One graded piece of the hom complex between arbitrary sheaf
/// complexes, with a basis of sheaf maps per contributing degree. Used
/// where section coordinates are unavailable (general sheaf inputs).
#[derive(Debug, Clone)]
pub struct SheafHomSlice {
    pub source: SheafComplex,
    pub target: SheafComplex,
    pub degree: i32,
    entries: Vec<SheafSliceEntry>,
    pub dim: usize,
}

#[derive(Debug, Clone)]
struct SheafSliceEntry {
    p: i32,
    basis: Vec<SheafMap>,
    offset: usize,
}

fn flatten_sheaf_map(phi: &SheafMap) -> Vec<u32> {
    let mut out = Vec::new();
    for x in 0..phi.source().space().n_points() {
        let m = phi.component(x);
        for i in 0..m.rows() {
            out.extend(m.row(i));
        }
    }
    out
}

pub fn sheaf_hom_slice(a: &SheafComplex, b: &SheafComplex, n: i32) -> Result<SheafHomSlice> {
    if a.space() != b.space() {
        return Err(Error::BaseMismatch("sheaf complex base spaces"));
    }
    let mut entries = Vec::new();
    let mut offset = 0usize;
    for p in a.lo()..=a.hi() {
        let src = a.component(p);
        let tgt = b.component(p + n);
        let basis = crate::sheaf::hom_sheaf(&src, &tgt)?;
        if basis.is_empty() {
            continue;
        }
        let d = basis.len();
        entries.push(SheafSliceEntry { p, basis, offset });
        offset += d;
    }
    Ok(SheafHomSlice {
        source: a.clone(),
        target: b.clone(),
        degree: n,
        entries,
        dim: offset,
    })
}

impl SheafHomSlice {
    pub fn coords(&self, phi: &BTreeMap<i32, SheafMap>) -> Result<Vec<u32>> {
        let p_char = self.source.space().p();
        let mut out = vec![0u32; self.dim];
        for entry in &self.entries {
            let zero = SheafMap::zero(
                &self.source.component(entry.p),
                &self.target.component(entry.p + self.degree),
            );
            let m = phi.get(&entry.p).unwrap_or(&zero);
            let flat = flatten_sheaf_map(m);
            if flat.is_empty() {
                continue;
            }
            let cols: Vec<Vec<u32>> = entry.basis.iter().map(flatten_sheaf_map).collect();
            let mat = Matrix::from_cols(p_char, flat.len(), cols);
            let coords = mat
                .coords_of(&flat)
                .ok_or_else(|| Error::Internal("map is not in the hom space".into()))?;
            out[entry.offset..entry.offset + coords.len()].copy_from_slice(&coords);
        }
        // components of phi outside the window must be zero
        for (p, m) in phi {
            if !m.is_zero() && !self.entries.iter().any(|e| e.p == *p) {
                return Err(Error::Shape(format!("unexpected hom component at {p}")));
            }
        }
        Ok(out)
    }

    pub fn element(&self, coords: &[u32]) -> BTreeMap<i32, SheafMap> {
        let mut out = BTreeMap::new();
        for entry in &self.entries {
            let mut acc = SheafMap::zero(
                &self.source.component(entry.p),
                &self.target.component(entry.p + self.degree),
            );
            for (i, b) in entry.basis.iter().enumerate() {
                let c = coords[entry.offset + i];
                if c != 0 {
                    acc = acc.add(&b.scale(c));
                }
            }
            if !acc.is_zero() {
                out.insert(entry.p, acc);
            }
        }
        out
    }

    /// d(phi)^p = d_B o phi^p - (-1)^n phi^{p+1} o d_A.
    pub fn apply_differential(&self, phi: &BTreeMap<i32, SheafMap>) -> Result<BTreeMap<i32, SheafMap>> {
        let p_char = self.source.space().p();
        let sign = if self.degree.rem_euclid(2) == 0 {
            fp::neg_mod(1, p_char)
        } else {
            1
        };
        let mut out: BTreeMap<i32, SheafMap> = BTreeMap::new();
        let mut add = |p: i32, m: SheafMap| {
            if m.is_zero() {
                return;
            }
            match out.get_mut(&p) {
                Some(e) => *e = e.add(&m),
                None => {
                    out.insert(p, m);
                }
            }
        };
        for (p, m) in phi {
            add(*p, self.target.differential(p + self.degree).compose(m)?);
            add(p - 1, m.compose(&self.source.differential(p - 1))?.scale(sign));
        }
        out.retain(|_, m| !m.is_zero());
        Ok(out)
    }

    pub fn differential_matrix(&self, next: &SheafHomSlice) -> Result<Matrix> {
        let p_char = self.source.space().p();
        let mut cols = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let mut coords = vec![0u32; self.dim];
            coords[i] = 1;
            let phi = self.element(&coords);
            cols.push(next.coords(&self.apply_differential(&phi)?)?);
        }
        Ok(Matrix::from_cols(p_char, next.dim, cols))
    }
}

/// Degree-zero cocycles modulo coboundaries at the sheaf level.
#[derive(Debug)]
pub struct SheafH0 {
    pub dim: usize,
    pub reps: Vec<BTreeMap<i32, SheafMap>>,
    pub slice0: SheafHomSlice,
    pub cocycles: Matrix,
    pub quotient: fp::Quotient,
}

pub fn sheaf_h0_hom(a: &SheafComplex, b: &SheafComplex) -> Result<SheafH0> {
    let slice_prev = sheaf_hom_slice(a, b, -1)?;
    let slice0 = sheaf_hom_slice(a, b, 0)?;
    let slice_next = sheaf_hom_slice(a, b, 1)?;
    let d0 = slice0.differential_matrix(&slice_next)?;
    let d_prev = slice_prev.differential_matrix(&slice0)?;
    let cocycles = d0.kernel();
    let mut boundary_cols = Vec::new();
    for c in 0..d_prev.cols() {
        let b_col = d_prev.column(c);
        boundary_cols.push(
            cocycles
                .coords_of(&b_col)
                .ok_or_else(|| Error::Internal("boundary is not a cocycle".into()))?,
        );
    }
    let p = a.space().p();
    let boundaries = Matrix::from_cols(p, cocycles.cols(), boundary_cols);
    let quotient = fp::quotient_by_span(p, cocycles.cols(), &boundaries);
    let mut reps = Vec::new();
    for i in 0..quotient.dim {
        let mut qc = vec![0u32; quotient.dim];
        qc[i] = 1;
        let z = quotient.section.apply(&qc);
        reps.push(slice0.element(&cocycles.apply(&z)));
    }
    let dim = quotient.dim;
    Ok(SheafH0 {
        dim,
        reps,
        slice0,
        cocycles,
        quotient,
    })
}

impl SheafH0 {
    pub fn class_of(&self, phi: &BTreeMap<i32, SheafMap>) -> Result<Vec<u32>> {
        let coords = self.slice0.coords(phi)?;
        let z = self.cocycles.coords_of(&coords).ok_or(Error::NotCocycle)?;
        Ok(self.quotient.proj.apply(&z))
    }
}
