//! The small categories of extension-by-zero modules and their finite
//! direct sums, and the rectified pullback with on-the-nose
//! functoriality.
//!
//! Morphisms are stored in section coordinates: a map out of O_{S,V} is
//! the section of the target it corresponds to under
//! hom(O_{S,V}, M) = Gamma(V, M). This makes equality bit-exact and
//! canonical, which is what the strictness checks assert.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fp::{self, Matrix};
use crate::ringedspace::{Open, RingedMap, SpaceRef};
use crate::sheaf::{
    ext_by_zero, pullback_map, sections, theta, SectionSpace, Sheaf, SheafMap,
    SumLayout,
};

/// An object of the small category of extension-by-zero modules: an open
/// V standing for O_{S,V}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FObject {
    pub space: SpaceRef,
    pub open: Open,
}

impl FObject {
    pub fn new(space: SpaceRef, open: Open) -> Result<Self> {
        if !space.is_open(&open) {
            return Err(Error::Shape(format!(
                "{:?} is not an open of the base",
                open.points()
            )));
        }
        Ok(FObject { space, open })
    }

    pub fn realize(&self) -> Sheaf {
        ext_by_zero(&self.space, &self.open)
    }

    /// The corresponding one-summand object of the direct-sum category.
    pub fn as_dobject(&self) -> DObject {
        DObject {
            space: self.space.clone(),
            opens: vec![self.open.clone()],
        }
    }

    /// The rectified pullback on objects: the preimage open.
    pub fn f_star(&self, f: &RingedMap) -> Result<FObject> {
        if &self.space != f.target() {
            return Err(Error::BaseMismatch("object space and map target"));
        }
        FObject::new(f.source().clone(), f.preimage(&self.open))
    }
}

/// An object of D_S: a finite list of opens standing for the direct sum
/// of the corresponding extension-by-zero modules. The empty list is the
/// zero object; equality is list equality (no quotient by permutation).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DObject {
    space: SpaceRef,
    opens: Vec<Open>,
}

impl DObject {
    pub fn new(space: SpaceRef, opens: Vec<Open>) -> Result<Self> {
        for v in &opens {
            if !space.is_open(v) {
                return Err(Error::Shape(format!(
                    "{:?} is not an open of the base",
                    v.points()
                )));
            }
        }
        Ok(DObject { space, opens })
    }

    pub fn zero(space: SpaceRef) -> Self {
        DObject {
            space,
            opens: Vec::new(),
        }
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn opens(&self) -> &[Open] {
        &self.opens
    }

    pub fn len(&self) -> usize {
        self.opens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.opens.is_empty()
    }

    /// Concatenation: the direct sum in D_S.
    pub fn concat(&self, other: &DObject) -> DObject {
        let mut opens = self.opens.clone();
        opens.extend(other.opens.iter().cloned());
        DObject {
            space: self.space.clone(),
            opens,
        }
    }

    /// Realize as a sheaf with the block layout of the summands.
    pub fn realize(&self) -> Result<(Sheaf, SumLayout)> {
        if self.opens.is_empty() {
            let n = self.space.n_points();
            return Ok((
                Sheaf::zero(self.space.clone()),
                SumLayout {
                    offsets: vec![vec![0; n]; 0],
                },
            ));
        }
        let parts: Vec<Sheaf> = self
            .opens
            .iter()
            .map(|v| ext_by_zero(&self.space, v))
            .collect();
        Sheaf::direct_sum(&parts)
    }
}

/// Section coordinates for a morphism O_{S,V} -> O_{S,W}: the ambient
/// family over the points of V with one block of dim O_x per point of
/// V meeting W.
pub fn pair_section_space(space: &SpaceRef, v: &Open, w: &Open) -> Result<SectionSpace> {
    sections(&ext_by_zero(space, w), v)
}

/// Entry layout: ambient family vector over V's points, blocks of
/// dim O_x for x in V meeting W and empty otherwise.
fn entry_len(space: &SpaceRef, v: &Open, w: &Open) -> usize {
    v.points()
        .iter()
        .filter(|x| w.contains(**x))
        .map(|&x| space.stalk(x).dim())
        .sum()
}

fn entry_offsets(space: &SpaceRef, v: &Open, w: &Open) -> BTreeMap<usize, usize> {
    let mut off = BTreeMap::new();
    let mut o = 0usize;
    for &x in v.points() {
        off.insert(x, o);
        if w.contains(x) {
            o += space.stalk(x).dim();
        }
    }
    off
}

/// A morphism of D_S in section coordinates: `entries[k][j]` is the section
/// of Gamma(V_j, O_{S,W_k}) representing the (k,j) component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DMorphism {
    source: DObject,
    target: DObject,
    entries: Vec<Vec<Vec<u32>>>,
}

impl DMorphism {
    pub fn new(source: DObject, target: DObject, entries: Vec<Vec<Vec<u32>>>) -> Result<Self> {
        if source.space != target.space {
            return Err(Error::BaseMismatch("base spaces of a D-morphism"));
        }
        if entries.len() != target.len() {
            return Err(Error::Shape("entry row count".into()));
        }
        let space = &source.space;
        for (k, row) in entries.iter().enumerate() {
            if row.len() != source.len() {
                return Err(Error::Shape("entry column count".into()));
            }
            for (j, e) in row.iter().enumerate() {
                let v = &source.opens[j];
                let w = &target.opens[k];
                if e.len() != entry_len(space, v, w) {
                    return Err(Error::Shape(format!("entry ({k},{j}) length")));
                }
                // the entry must be a compatible family
                let sec = pair_section_space(space, v, w)?;
                let mut amb = vec![0u32; sec.total];
                let off = entry_offsets(space, v, w);
                for (pos, &x) in v.points().iter().enumerate() {
                    if w.contains(x) {
                        let d = space.stalk(x).dim();
                        let o = off[&x];
                        amb[sec.offsets[pos]..sec.offsets[pos] + d]
                            .copy_from_slice(&e[o..o + d]);
                    }
                }
                if sec.express(&amb).is_none() {
                    return Err(Error::Invariant(format!(
                        "entry ({k},{j}) is not a compatible section family"
                    )));
                }
            }
        }
        Ok(DMorphism {
            source,
            target,
            entries,
        })
    }

    pub fn source(&self) -> &DObject {
        &self.source
    }
    pub fn target(&self) -> &DObject {
        &self.target
    }
    pub fn entry(&self, k: usize, j: usize) -> &[u32] {
        &self.entries[k][j]
    }
    pub fn entries(&self) -> &Vec<Vec<Vec<u32>>> {
        &self.entries
    }

    pub(crate) fn entries_mut(&mut self) -> &mut Vec<Vec<Vec<u32>>> {
        &mut self.entries
    }

    pub fn zero(source: DObject, target: DObject) -> Self {
        let space = source.space.clone();
        let entries = target
            .opens
            .iter()
            .map(|w| {
                source
                    .opens
                    .iter()
                    .map(|v| vec![0u32; entry_len(&space, v, w)])
                    .collect()
            })
            .collect();
        DMorphism {
            source,
            target,
            entries,
        }
    }

    pub fn identity(x: &DObject) -> Self {
        let space = x.space.clone();
        let mut m = DMorphism::zero(x.clone(), x.clone());
        for j in 0..x.len() {
            let v = &x.opens[j];
            let off = entry_offsets(&space, v, v);
            let mut e = vec![0u32; entry_len(&space, v, v)];
            for &pt in v.points() {
                let u = space.stalk(pt).unit();
                let o = off[&pt];
                e[o..o + u.len()].copy_from_slice(u);
            }
            m.entries[j][j] = e;
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.entries
            .iter()
            .all(|row| row.iter().all(|e| fp::vec_is_zero(e)))
    }

    pub fn add(&self, other: &DMorphism) -> DMorphism {
        assert_eq!(self.source, other.source);
        assert_eq!(self.target, other.target);
        let p = self.source.space.p();
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(r1, r2)| {
                r1.iter()
                    .zip(r2)
                    .map(|(a, b)| fp::vec_add(p, a, b))
                    .collect()
            })
            .collect();
        DMorphism {
            source: self.source.clone(),
            target: self.target.clone(),
            entries,
        }
    }

    pub fn scale(&self, c: u32) -> DMorphism {
        let p = self.source.space.p();
        let entries = self
            .entries
            .iter()
            .map(|r| r.iter().map(|e| fp::vec_scale(p, c, e)).collect())
            .collect();
        DMorphism {
            source: self.source.clone(),
            target: self.target.clone(),
            entries,
        }
    }

    pub fn neg(&self) -> DMorphism {
        self.scale(fp::neg_mod(1, self.source.space.p()))
    }

    pub fn sub(&self, other: &DMorphism) -> DMorphism {
        self.add(&other.neg())
    }

    /// Composition self o other, computed directly on section
    /// coordinates: at each point the entry sections multiply in the
    /// stalk algebra.
    pub fn compose(&self, other: &DMorphism) -> Result<DMorphism> {
        if other.target != self.source {
            return Err(Error::BaseMismatch("D-objects in composition"));
        }
        let space = self.source.space.clone();
        let p = space.p();
        let mut out = DMorphism::zero(other.source.clone(), self.target.clone());
        for i in 0..self.target.len() {
            let x_open = &self.target.opens[i];
            for j in 0..other.source.len() {
                let v_open = &other.source.opens[j];
                let mut acc = vec![0u32; entry_len(&space, v_open, x_open)];
                let acc_off = entry_offsets(&space, v_open, x_open);
                for k in 0..self.source.len() {
                    let w_open = &self.source.opens[k];
                    let s = other.entry(k, j); // Gamma(V, O_W)
                    let t = self.entry(i, k); // Gamma(W, O_X)
                    let s_off = entry_offsets(&space, v_open, w_open);
                    let t_off = entry_offsets(&space, w_open, x_open);
                    for &pt in v_open.points() {
                        if !x_open.contains(pt) || !w_open.contains(pt) {
                            continue;
                        }
                        let d = space.stalk(pt).dim();
                        let sv = &s[s_off[&pt]..s_off[&pt] + d];
                        let tv = &t[t_off[&pt]..t_off[&pt] + d];
                        let prod = space.stalk(pt).mul(sv, tv);
                        let o = acc_off[&pt];
                        for (r, &val) in prod.iter().enumerate() {
                            acc[o + r] = (acc[o + r] + val) % p;
                        }
                    }
                }
                out.entries[i][j] = acc;
            }
        }
        Ok(out)
    }

    /// Realize as a sheaf map between the realized direct sums.
    pub fn realize(&self) -> Result<SheafMap> {
        let (src, src_layout) = self.source.realize()?;
        let (tgt, tgt_layout) = self.target.realize()?;
        let space = self.source.space.clone();
        let p = space.p();
        let mut comps = Vec::with_capacity(space.n_points());
        for x in 0..space.n_points() {
            let mut m = Matrix::zeros(p, tgt.stalk_dim(x), src.stalk_dim(x));
            for k in 0..self.target.len() {
                let w = &self.target.opens[k];
                if !w.contains(x) {
                    continue;
                }
                for j in 0..self.source.len() {
                    let v = &self.source.opens[j];
                    if !v.contains(x) {
                        continue;
                    }
                    let off = entry_offsets(&space, v, w);
                    let d = space.stalk(x).dim();
                    let e = self.entry(k, j);
                    let sx = &e[off[&x]..off[&x] + d];
                    let blk = space.stalk(x).left_mul_matrix(sx);
                    m.put_block(tgt_layout.offsets[k][x], src_layout.offsets[j][x], &blk);
                }
            }
            comps.push(m);
        }
        SheafMap::new(src, tgt, comps)
    }

    /// Recover section coordinates from a sheaf map between realized
    /// direct sums.
    pub fn from_sheaf_map(phi: &SheafMap, source: &DObject, target: &DObject) -> Result<DMorphism> {
        let space = source.space.clone();
        let (_, src_layout) = source.realize()?;
        let (_, tgt_layout) = target.realize()?;
        let mut out = DMorphism::zero(source.clone(), target.clone());
        for k in 0..target.len() {
            let w = &target.opens[k];
            for j in 0..source.len() {
                let v = &source.opens[j];
                let off = entry_offsets(&space, v, w);
                let mut e = vec![0u32; entry_len(&space, v, w)];
                for &x in v.points() {
                    if !w.contains(x) {
                        continue;
                    }
                    let d = space.stalk(x).dim();
                    // image of the unit of the j-th block under the
                    // component at x, projected to the k-th block
                    let mut unit_vec = vec![0u32; phi.source().stalk_dim(x)];
                    let uo = src_layout.offsets[j][x];
                    unit_vec[uo..uo + d].copy_from_slice(space.stalk(x).unit());
                    let img = phi.component(x).apply(&unit_vec);
                    let to = tgt_layout.offsets[k][x];
                    e[off[&x]..off[&x] + d].copy_from_slice(&img[to..to + d]);
                }
                out.entries[k][j] = e;
            }
        }
        // round trip must reproduce the map
        let check = out.realize()?;
        if &check != phi {
            return Err(Error::Internal(
                "sheaf map is not of matrix form over the given D-objects".into(),
            ));
        }
        Ok(out)
    }
}

/// Assemble a morphism between concatenated D-objects from blocks;
/// `blocks[bi][bj]` maps `sources[bj]` to `targets[bi]`, None meaning zero.
pub fn block_dmorphism(
    sources: &[&DObject],
    targets: &[&DObject],
    blocks: &[Vec<Option<&DMorphism>>],
) -> Result<DMorphism> {
    let space = sources
        .first()
        .or(targets.first())
        .map(|d| d.space().clone())
        .ok_or_else(|| Error::Shape("block morphism needs at least one part".into()))?;
    let mut src = DObject::zero(space.clone());
    for s in sources {
        src = src.concat(s);
    }
    let mut tgt = DObject::zero(space.clone());
    for t in targets {
        tgt = tgt.concat(t);
    }
    let mut out = DMorphism::zero(src, tgt);
    let mut row_off = 0usize;
    for (bi, t) in targets.iter().enumerate() {
        let mut col_off = 0usize;
        for (bj, s) in sources.iter().enumerate() {
            if let Some(b) = blocks[bi][bj] {
                if b.source() != *s || b.target() != *t {
                    return Err(Error::Shape(format!("block ({bi},{bj}) endpoints")));
                }
                for k in 0..t.len() {
                    for j in 0..s.len() {
                        out.entries[row_off + k][col_off + j] = b.entry(k, j).to_vec();
                    }
                }
            }
            col_off += s.len();
        }
        row_off += t.len();
    }
    Ok(out)
}

/// f* on objects of D_S: entrywise preimage of opens, position-preserving.
pub fn f_star_object(f: &RingedMap, x: &DObject) -> Result<DObject> {
    if &x.space != f.target() {
        return Err(Error::BaseMismatch("D-object space and map target"));
    }
    DObject::new(
        f.source().clone(),
        x.opens.iter().map(|v| f.preimage(v)).collect(),
    )
}

/// f* on morphisms: realize each entry, pull back, conjugate by the theta
/// isomorphisms, and read off section coordinates.
pub fn f_star_morphism(f: &RingedMap, m: &DMorphism) -> Result<DMorphism> {
    if &m.source.space != f.target() {
        return Err(Error::BaseMismatch("D-morphism space and map target"));
    }
    let src = f_star_object(f, &m.source)?;
    let tgt = f_star_object(f, &m.target)?;
    // compute thetas once per distinct open
    let mut all_opens: Vec<Open> = m.source.opens.clone();
    all_opens.extend(m.target.opens.iter().cloned());
    all_opens.sort();
    all_opens.dedup();
    let mut thetas: BTreeMap<Open, (SheafMap, SheafMap)> = BTreeMap::new();
    for v in &all_opens {
        thetas.insert(v.clone(), theta(f, v)?);
    }
    let space_t = f.source().clone();
    let mut out = DMorphism::zero(src.clone(), tgt.clone());
    for k in 0..m.target.len() {
        let w = &m.target.opens[k];
        let fw = f.preimage(w);
        for j in 0..m.source.len() {
            let v = &m.source.opens[j];
            let fv = f.preimage(v);
            // realize the single entry as a sheaf map O_{S,V} -> O_{S,W}
            let single_src = DObject::new(m.source.space.clone(), vec![v.clone()])?;
            let single_tgt = DObject::new(m.source.space.clone(), vec![w.clone()])?;
            let mut entry_m = DMorphism::zero(single_src, single_tgt);
            entry_m.entries[0][0] = m.entry(k, j).to_vec();
            let phi = entry_m.realize()?;
            let pulled = pullback_map(f, &phi)?;
            let (th_w, _) = &thetas[w];
            let (_, th_v_inv) = &thetas[v];
            let conj = th_w.compose(&pulled.compose(th_v_inv)?)?;
            // section coordinates of the conjugate
            let off = entry_offsets(&space_t, &fv, &fw);
            let mut e = vec![0u32; entry_len(&space_t, &fv, &fw)];
            for &t in fv.points() {
                if !fw.contains(t) {
                    continue;
                }
                let d = space_t.stalk(t).dim();
                let img = conj.component(t).apply(space_t.stalk(t).unit());
                e[off[&t]..off[&t] + d].copy_from_slice(&img);
            }
            out.entries[k][j] = e;
        }
    }
    // shapes were fixed by construction; re-validate the section property
    DMorphism::new(src, tgt, out.entries)
}

/// Report from a strictness or cocycle suite: failing case descriptions.
#[derive(Debug, Clone, Default)]
pub struct CheckReport {
    pub cases: usize,
    pub failures: Vec<String>,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Assert g*(f* X) = (fg)* X and g*(f* m) = (fg)* m bit-exactly on the
/// given samples.
pub fn check_strict_functoriality(
    f: &RingedMap,
    g: &RingedMap,
    objects: &[DObject],
    morphisms: &[DMorphism],
) -> Result<CheckReport> {
    if g.target() != f.source() {
        return Err(Error::BaseMismatch("maps are not composable"));
    }
    let fg = f.compose(g)?;
    let mut rep = CheckReport::default();
    for (i, x) in objects.iter().enumerate() {
        rep.cases += 1;
        let two_step = f_star_object(g, &f_star_object(f, x)?)?;
        let one_step = f_star_object(&fg, x)?;
        if two_step != one_step {
            rep.failures
                .push(format!("object sample {i}: g*f*X != (fg)*X"));
        }
    }
    for (i, m) in morphisms.iter().enumerate() {
        rep.cases += 1;
        let two_step = f_star_morphism(g, &f_star_morphism(f, m)?)?;
        let one_step = f_star_morphism(&fg, m)?;
        if two_step != one_step {
            rep.failures
                .push(format!("morphism sample {i}: g*f*m != (fg)*m"));
        }
    }
    Ok(rep)
}

/// The cocycle identity: theta_{g, f^{-1}W} o g*(theta_{f,W}) o alpha =
/// theta_{fg, W}, bit-exact as sheaf maps, plus the proof-style check
/// that both sides induce the same map under hom(-, N) for the given
/// sample sheaves.
pub fn check_theta_cocycle(
    f: &RingedMap,
    g: &RingedMap,
    w: &Open,
    samples: &[Sheaf],
) -> Result<CheckReport> {
    let mut rep = CheckReport::default();
    let fg = f.compose(g)?;
    let ow = ext_by_zero(f.target(), w);
    let (th_f, _) = theta(f, w)?;
    let g_th_f = pullback_map(g, &th_f)?;
    let fw = f.preimage(w);
    let (th_g, _) = theta(g, &fw)?;
    let (al, _) = crate::sheaf::alpha(f, g, &ow)?;
    let lhs = th_g.compose(&g_th_f.compose(&al)?)?;
    let (rhs, _) = theta(&fg, w)?;
    rep.cases += 1;
    if lhs != rhs {
        rep.failures.push(format!(
            "cocycle identity fails for W = {:?}",
            w.points()
        ));
    }
    // proof-style: equal images under hom(-, N)
    let target = ext_by_zero(g.source(), &g.preimage(&fw));
    for (i, n) in samples.iter().enumerate() {
        rep.cases += 1;
        let homs = crate::sheaf::hom_sheaf(&target, n)?;
        for psi in &homs {
            let a = psi.compose(&lhs)?;
            let b = psi.compose(&rhs)?;
            if a != b {
                rep.failures.push(format!(
                    "hom(-,N) images differ for W = {:?}, sample {i}",
                    w.points()
                ));
                break;
            }
        }
    }
    Ok(rep)
}
