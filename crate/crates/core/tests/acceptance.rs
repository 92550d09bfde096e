//! Acceptance suite: one test per top-level guarantee, each printing a
//! PASS line with its measured evidence. Every tolerance here is exact
//! (all arithmetic is over prime fields).

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use dgperf_core::algebra::FinModule;
use dgperf_core::dgcat::{
    cone, hom_slice, is_acyclic, euler_characteristics,
    DComplex, DComplexRef, HomElement, SheafComplex,
};
use dgperf_core::drinfeld::{
    derived_hom_oracle, h0_compare, quasi_inverse, OracleOutcome, Quotient,
};
use dgperf_core::error::Error;
use dgperf_core::fixtures::*;
use dgperf_core::fp::{self, Matrix};
use dgperf_core::rectify::{
    check_strict_functoriality, check_theta_cocycle, pair_section_space, DMorphism, DObject,
};
use dgperf_core::resolve::{cardinality_audit, cover_epi, resolve};
use dgperf_core::ringedspace::Open;
use dgperf_core::sample;
use dgperf_core::sheaf::{
    ext_by_zero, hom_sheaf, sections, sections_map,
    sigma_forward, Sheaf, SheafMap,
};

#[test]
fn a1_strict_functoriality() {
    let start = Instant::now();
    let chains = all_chains();
    assert!(chains.len() >= 3);
    let mut total_morphisms = 0usize;
    for ch in &chains {
        let space = ch.f.target().clone();
        let opens = space.opens(&caps()).unwrap();
        let objects: Vec<DObject> = opens
            .iter()
            .map(|v| DObject::new(space.clone(), vec![v.clone()]).unwrap())
            .collect();
        let mut r = sample::rng(0xA1);
        let morphisms: Vec<DMorphism> = (0..100)
            .map(|_| sample::random_dmorphism(&space, &opens, 2, &mut r).unwrap())
            .collect();
        total_morphisms += morphisms.len();
        let rep = check_strict_functoriality(&ch.f, &ch.g, &objects, &morphisms).unwrap();
        assert!(rep.ok(), "chain {}: {:?}", ch.name, rep.failures);
    }
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 10.0, "took {dt:?}");
    println!(
        "PASS strict-functoriality: {} chains x 100 morphisms ({} total), bit-exact, {:?}",
        chains.len(),
        total_morphisms,
        dt
    );
}

#[test]
fn a2_theta_cocycle() {
    let start = Instant::now();
    let chains = all_chains();
    let mut cases = 0usize;
    for ch in &chains {
        let s_space = ch.f.target().clone();
        let u_space = ch.g.source().clone();
        // >= 10 sample sheaves N for the proof-style hom(-, N) check:
        // structure, zero, every extension by zero, and all their pairwise
        // direct sums
        let mut samples = vec![
            Sheaf::structure(&u_space),
            Sheaf::zero(u_space.clone()),
        ];
        let exts: Vec<Sheaf> = u_space
            .opens(&caps())
            .unwrap()
            .iter()
            .map(|v| ext_by_zero(&u_space, v))
            .collect();
        samples.extend(exts.iter().cloned());
        for a in &exts {
            for b in &exts {
                let (sum, _) = Sheaf::direct_sum(&[a.clone(), b.clone()]).unwrap();
                samples.push(sum);
            }
            let (sum3, _) =
                Sheaf::direct_sum(&[a.clone(), a.clone(), Sheaf::structure(&u_space)]).unwrap();
            samples.push(sum3);
        }
        assert!(samples.len() >= 10, "only {} sample sheaves", samples.len());
        for w in s_space.opens(&caps()).unwrap() {
            let rep = check_theta_cocycle(&ch.f, &ch.g, &w, &samples).unwrap();
            assert!(
                rep.ok(),
                "chain {} W {:?}: {:?}",
                ch.name,
                w.points(),
                rep.failures
            );
            cases += rep.cases;
        }
    }
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 5.0, "took {dt:?}");
    println!(
        "PASS theta-cocycle: every open on {} chains, {} cases, exact, {:?}",
        chains.len(),
        cases,
        dt
    );
}

#[test]
fn a3_sigma_and_theta_naturality() {
    let mut sigma_checked = 0usize;
    // sigma naturality: for phi : M -> M' the square
    // hom(O_V, M) -> Gamma(V, M) -> Gamma(V, M') equals postcompose-then-sigma
    for ch in [spec_chain(), dual_chain(), sierpinski_chain(), f4_chain()] {
        let space = ch.f.target().clone();
        let o = Sheaf::structure(&space);
        let mut r = sample::rng(0xA3);
        for v in space.opens(&caps()).unwrap() {
            let ov = ext_by_zero(&space, &v);
            for _ in 0..40 {
                let Some(phi) = sample::random_sheaf_map(&o, &o, &mut r).unwrap() else {
                    continue;
                };
                for psi in hom_sheaf(&ov, &o).unwrap() {
                    // route 1: sigma(phi o psi)
                    let fam1 = sigma_forward(&phi.compose(&psi).unwrap(), &v);
                    // route 2: Gamma(phi) applied to sigma(psi)
                    let fam2_pre = sigma_forward(&psi, &v);
                    let src_sec = sections(&o, &v).unwrap();
                    let tgt_sec = sections(&o, &v).unwrap();
                    let gm = sections_map(&phi, &src_sec, &tgt_sec);
                    let coords = src_sec.express(&fam2_pre).unwrap();
                    let fam2 = tgt_sec.ambient(&gm.apply(&coords));
                    assert_eq!(fam1, fam2);
                    sigma_checked += 1;
                }
            }
        }
    }
    assert!(sigma_checked >= 100, "only {sigma_checked} sigma squares");
    // theta naturality: theta_W o f*(phi) = realize(f* phi) o theta_V
    let mut theta_checked = 0usize;
    for ch in all_chains() {
        let f = &ch.f;
        let space = f.target().clone();
        let opens = space.opens(&caps()).unwrap();
        let mut r = sample::rng(0xA3 + 1);
        for i in 0..40 {
            let src = DObject::new(space.clone(), vec![opens[i % opens.len()].clone()]).unwrap();
            let tgt =
                DObject::new(space.clone(), vec![opens[(i / 2) % opens.len()].clone()]).unwrap();
            let m = sample::random_dmorphism_between(&src, &tgt, &mut r).unwrap();
            let v = &src.opens()[0];
            let w = &tgt.opens()[0];
            let phi = m.realize().unwrap();
            let (th_v, _) = dgperf_core::sheaf::theta(f, v).unwrap();
            let (th_w, _) = dgperf_core::sheaf::theta(f, w).unwrap();
            let lifted = dgperf_core::rectify::f_star_morphism(f, &m).unwrap();
            let lhs = th_w
                .compose(&dgperf_core::sheaf::pullback_map(f, &phi).unwrap())
                .unwrap();
            let rhs = lifted.realize().unwrap().compose(&th_v).unwrap();
            assert_eq!(lhs, rhs, "chain {}", ch.name);
            theta_checked += 1;
        }
    }
    assert!(theta_checked >= 100, "only {theta_checked} theta squares");
    println!(
        "PASS sigma-theta-naturality: {} sigma squares, {} theta squares, exact",
        sigma_checked, theta_checked
    );
}

#[test]
fn a4_dg_laws() {
    let mut elements = 0usize;
    let mut complexes = 0usize;
    let mut cones = 0usize;
    for (seed, space) in [
        (1u64, spec_f2().space),
        (2, spec_f2xf2().space),
        (3, spec_dual().space),
        (4, sierpinski()),
        (5, spec_f4().space),
    ] {
        let opens = space.opens(&caps()).unwrap();
        let mut r = sample::rng(0xA4 + seed);
        let p = space.p();
        for _ in 0..5 {
            let e = Arc::new(sample::random_two_term_complex(&space, &opens, 2, 0, &mut r).unwrap());
            let f = Arc::new(sample::random_three_term_complex(&space, &opens, 2, -1, &mut r).unwrap());
            complexes += 2;
            for deg in [-1, 0, 1] {
                for _ in 0..2 {
                    let phi = sample::random_hom_element(&e, &f, deg, &mut r).unwrap();
                    assert!(phi.differential().differential().is_zero());
                    elements += 1;
                    // Leibniz against a second element
                    let psi = sample::random_hom_element(&f, &e, 0, &mut r).unwrap();
                    let lhs = psi.compose(&phi).unwrap().differential();
                    let rhs = psi
                        .differential()
                        .compose(&phi)
                        .unwrap()
                        .add(&psi.compose(&phi.differential()).unwrap());
                    assert_eq!(lhs, rhs);
                    elements += 1;
                }
            }
            // cone(id) acyclic and Euler identity on a sampled cone
            let c_id = cone(&HomElement::identity(&e)).unwrap();
            assert!(is_acyclic(&c_id.cone).unwrap().acyclic);
            let s0 = hom_slice(&e, &f, 0).unwrap();
            let s1 = hom_slice(&e, &f, 1).unwrap();
            let kernel = s0.differential_matrix(&s1).unwrap().kernel();
            if kernel.cols() > 0 {
                let coeffs: Vec<u32> = (0..kernel.cols())
                    .map(|_| rand::Rng::gen_range(&mut r, 0..p))
                    .collect();
                let s = s0.element(&kernel.apply(&coeffs)).unwrap();
                let c = cone(&s).unwrap();
                let chi_c = euler_characteristics(&c.cone.realize().unwrap());
                let chi_e = euler_characteristics(&e.realize().unwrap());
                let chi_f = euler_characteristics(&f.realize().unwrap());
                for x in 0..space.n_points() {
                    assert_eq!(chi_c[x], chi_f[x] - chi_e[x]);
                }
                cones += 1;
            }
        }
    }
    assert!(elements >= 200, "only {elements} sampled elements");
    assert!(complexes >= 5);
    println!(
        "PASS dg-laws: d^2 = 0 and Leibniz on {} elements over {} complexes, {} cones checked, exact",
        elements, complexes, cones
    );
}

#[test]
fn a5_cover_epimorphisms() {
    let mut count = 0usize;
    // fixture epimorphisms plus seeded random ones on discrete spaces
    let mut epis: Vec<SheafMap> = Vec::new();
    for sp in [spec_f2(), spec_f2xf2(), spec_dual(), spec_f4()] {
        let o = Sheaf::structure(&sp.space);
        epis.push(SheafMap::identity(&o));
        for v in sp.space.opens(&caps()).unwrap() {
            if v.is_empty() {
                continue;
            }
            // O_S ->> O_{S,V} on a discrete space: identity over V, zero out
            let m = ext_by_zero(&sp.space, &v);
            let comps: Vec<Matrix> = (0..sp.space.n_points())
                .map(|x| {
                    if v.contains(x) {
                        Matrix::identity(sp.space.p(), m.stalk_dim(x))
                    } else {
                        Matrix::zeros(sp.space.p(), 0, o.stalk_dim(x))
                    }
                })
                .collect();
            if let Ok(pi) = SheafMap::new(o.clone(), m, comps) {
                epis.push(pi);
            }
        }
    }
    // Sierpinski: O_X ->> skyscraper
    {
        let x = sierpinski();
        let o = Sheaf::structure(&x);
        let sky = skyscraper_sierpinski();
        let s = x.point_index("s").unwrap();
        let mut comps = vec![Matrix::zeros(2, 0, 1); 2];
        comps[s] = Matrix::from_rows(2, vec![vec![1, 0]]);
        epis.push(SheafMap::new(o, sky, comps).unwrap());
    }
    // seeded random epimorphisms between direct sums on discrete spaces
    for sp in [spec_f2(), spec_f2xf2(), spec_f4()] {
        let o = Sheaf::structure(&sp.space);
        let (sum, _) = Sheaf::direct_sum(&[o.clone(), o.clone()]).unwrap();
        let mut r = sample::rng(0xA5);
        for _ in 0..8 {
            if let Some(phi) = sample::random_sheaf_map(&sum, &o, &mut r).unwrap() {
                if phi.is_epi() {
                    epis.push(phi);
                }
            }
        }
    }
    for pi in &epis {
        if !pi.is_epi() {
            continue;
        }
        let res = cover_epi(pi, &caps()).unwrap();
        assert!(res.composite.is_epi());
        // independent count: enumerate sections of N over each open and
        // count distinct images under pi
        let mut expected = 0usize;
        for v in pi.source().space().opens(&caps()).unwrap() {
            let gamma_n = sections(pi.source(), &v).unwrap();
            let gamma_m = sections(pi.target(), &v).unwrap();
            let pv = sections_map(pi, &gamma_n, &gamma_m);
            let mut images = std::collections::BTreeSet::new();
            for c in fp::all_vectors(pi.source().space().p(), gamma_n.dim()) {
                images.insert(pv.apply(&c));
            }
            expected += images.len();
        }
        assert_eq!(res.j_count(), expected);
        count += 1;
    }
    assert!(count >= 20, "only {count} epimorphisms sampled");
    println!(
        "PASS cover-epi: {} epimorphisms, stalkwise-surjective composites, |J| matches enumeration, exact",
        count
    );
}

#[test]
fn a6_resolutions() {
    let mut total = 0usize;
    let mut field_complete = 0usize;
    // field-stalk inputs: discrete spaces and a chain poset
    let mut inputs: Vec<(SheafComplex, bool)> = Vec::new();
    for sp in [spec_f2(), spec_f2xf2(), spec_f4()] {
        let o = Sheaf::structure(&sp.space);
        inputs.push((SheafComplex::concentrated(o.clone(), 0), true));
        for v in sp.space.opens(&caps()).unwrap() {
            if v.is_empty() {
                continue;
            }
            let m = ext_by_zero(&sp.space, &v);
            inputs.push((SheafComplex::concentrated(m, 0), true));
            let o2 = Sheaf::structure(&sp.space);
            let idm = SheafMap::identity(&o2);
            inputs.push((
                SheafComplex::new(sp.space.clone(), -1, vec![o2.clone(), o2.clone()], vec![idm])
                    .unwrap(),
                true,
            ));
        }
    }
    // chain poset skyscraper (field stalks)
    {
        let x = chain3();
        let k = f2();
        let sky_stalks = vec![
            FinModule::free(k.clone(), 1),
            FinModule::zero(k.clone()),
            FinModule::zero(k.clone()),
        ];
        let mut comp = BTreeMap::new();
        comp.insert((0usize, 1usize), Matrix::zeros(2, 0, 1));
        comp.insert((0usize, 2usize), Matrix::zeros(2, 0, 1));
        comp.insert((1usize, 2usize), Matrix::zeros(2, 0, 0));
        let sky = Sheaf::new(x.clone(), sky_stalks, comp).unwrap();
        inputs.push((SheafComplex::concentrated(sky, 0), true));
        inputs.push((SheafComplex::concentrated(Sheaf::structure(&x), 0), true));
    }
    // non-field stalks: dual numbers and the Sierpinski skyscraper
    {
        let sp = spec_dual();
        inputs.push((
            SheafComplex::concentrated(Sheaf::structure(&sp.space), 0),
            false,
        ));
        inputs.push((SheafComplex::concentrated(skyscraper_spec_dual(), 0), false));
        inputs.push((
            SheafComplex::concentrated(skyscraper_sierpinski(), 0),
            false,
        ));
        inputs.push((
            SheafComplex::concentrated(Sheaf::structure(&sierpinski()), 0),
            false,
        ));
    }
    // realized two-term complexes with zero differential
    for sp in [spec_f2(), spec_f2xf2()] {
        let o = Sheaf::structure(&sp.space);
        let z = SheafMap::zero(&o, &o);
        inputs.push((
            SheafComplex::new(sp.space.clone(), 0, vec![o.clone(), o.clone()], vec![z]).unwrap(),
            true,
        ));
    }
    for (e, field_stalks) in &inputs {
        let span = if e.hi() >= e.lo() {
            (e.hi() - e.lo() + 1) as usize
        } else {
            1
        };
        let res = resolve(e, span + 1).unwrap();
        let rep = res.verify().unwrap();
        assert!(rep.ok(), "{:?}", rep.failures);
        if *field_stalks {
            assert!(res.complete, "field-stalk input did not complete");
            assert!(res.stages_below <= span + 1);
            field_complete += 1;
        }
        total += 1;
    }
    assert!(total >= 20, "only {total} inputs resolved");
    println!(
        "PASS resolve: {} inputs, cone homology vanishes on validity ranges, {} field-stalk inputs complete within span+1, exact",
        total, field_complete
    );
}

#[test]
fn a7_drinfeld_layer() {
    let mut eps_checked = 0usize;
    let mut quasi_checked = 0usize;
    for sp_space in [spec_f2().space, spec_f2xf2().space] {
        let q = Quotient::new(sp_space.clone());
        let opens = sp_space.opens(&caps()).unwrap();
        let mut r = sample::rng(0xA7);
        // register a few acyclics and verify d(eps) = id
        for _ in 0..3 {
            let e = Arc::new(
                sample::random_two_term_complex(&sp_space, &opens, 2, 0, &mut r).unwrap(),
            );
            let c = cone(&HomElement::identity(&e)).unwrap().cone;
            let cid = q.adjoin_acyclic(&c).unwrap();
            let eps = q.epsilon(cid).unwrap();
            let id_c = q.from_hom(&HomElement::identity(&c)).unwrap();
            assert_eq!(q.differential(&eps).unwrap(), id_c);
            eps_checked += 1;
        }
        // quasi-inverse identities on fixture quasi-isomorphisms
        // (quasi_inverse verifies t o s - id = d(h1), s o t - id = d(h2)
        // exactly and errors otherwise)
        let x = DObject::new(sp_space.clone(), vec![sp_space.whole()]).unwrap();
        let e = Arc::new(DComplex::concentrated(x.clone(), 0));
        quasi_inverse(&q, &HomElement::identity(&e)).unwrap();
        quasi_checked += 1;
        // an end-to-end resolve-produced quasi-isomorphism
        let realized = e.realize().unwrap();
        let res = resolve(&realized, 4).unwrap();
        assert!(res.complete);
        let p_cplx: DComplexRef = Arc::new(res.complex.clone());
        let s = dgperf_core::drinfeld::resolution_hom_element(&res, &p_cplx, &e).unwrap();
        quasi_inverse(&q, &s).unwrap();
        quasi_checked += 1;
    }
    println!(
        "PASS drinfeld: d(eps) = id for {} registered acyclics, {} quasi-inverse identity sets verified in exact normal form",
        eps_checked, quasi_checked
    );
}

#[test]
fn a8_oracle_consistency() {
    let mut pairs = 0usize;
    // >= 10 pairs over the discrete two-point fixture, with the pullback
    // square checked along the chain map into it
    let ch = spec_chain();
    let s_space = ch.g.target().clone(); // the two-point space
    assert_eq!(s_space.n_points(), 2);
    let whole = DObject::new(s_space.clone(), vec![s_space.whole()]).unwrap();
    let half0 = DObject::new(s_space.clone(), vec![Open::new(vec![0])]).unwrap();
    let half1 = DObject::new(s_space.clone(), vec![Open::new(vec![1])]).unwrap();
    let both = DObject::new(s_space.clone(), vec![Open::new(vec![0]), Open::new(vec![1])]).unwrap();
    let objects = [whole.clone(), half0.clone(), half1.clone(), both.clone()];
    let mut e_list: Vec<DComplexRef> = Vec::new();
    for o in &objects {
        e_list.push(Arc::new(DComplex::concentrated(o.clone(), 0)));
    }
    e_list.push(Arc::new(DComplex::two_term(
        0,
        DMorphism::zero(half0.clone(), whole.clone()),
    )));
    // the canonical inclusion-like two-term complex
    {
        let sec = pair_section_space(&s_space, &Open::new(vec![0]), &s_space.whole()).unwrap();
        let mut fam = Vec::new();
        for &pt in Open::new(vec![0]).points() {
            fam.extend(s_space.stalk(pt).unit());
        }
        let coords = sec.express(&fam).unwrap();
        let mut entries = DMorphism::zero(half0.clone(), whole.clone()).entries().clone();
        entries[0][0] = sec.ambient(&coords);
        let d = DMorphism::new(half0.clone(), whole.clone(), entries).unwrap();
        e_list.push(Arc::new(DComplex::two_term(0, d)));
    }
    let q_s = Quotient::new(s_space.clone());
    let q_t = Quotient::new(ch.g.source().clone());
    let mut square_classes = 0usize;
    for e in &e_list {
        for f_cplx in &e_list[..3] {
            let with_square = pairs % 2 == 0;
            let rep = h0_compare(
                &q_s,
                e,
                f_cplx,
                if with_square { Some((&ch.g, &q_t)) } else { None },
                2,
                4,
            )
            .unwrap();
            assert!(rep.ok(), "{:?}", rep.failures);
            if with_square {
                square_classes += rep.oracle_dim;
            }
            pairs += 1;
        }
    }
    assert!(pairs >= 10, "only {pairs} pairs");
    // oracle unavailability is a reported outcome only for the documented
    // non-perfect skyscraper fixture
    let sky = skyscraper_spec_dual();
    let es = SheafComplex::concentrated(sky, 0);
    match derived_hom_oracle(&es, &es, 4).unwrap() {
        OracleOutcome::TruncationStable { dim, truncated_at, .. } => {
            assert_eq!(dim, 1);
            println!(
                "NOTE skyscraper fixture: oracle truncation at degree {} with stabilized H0 dim {}",
                truncated_at, dim
            );
        }
        OracleOutcome::Exact { .. } => panic!("skyscraper resolution cannot complete"),
    }
    assert!(matches!(
        derived_hom_oracle(&es, &es, 1),
        Err(Error::OracleUnavailable(_))
    ));
    println!(
        "PASS oracle-consistency: {} pairs consistent up to bound, pullback square commutes on {} oracle classes",
        pairs, square_classes
    );
}

#[test]
fn a9_cardinality_audits() {
    let start = Instant::now();
    let mut audits = 0usize;
    for sp in [spec_f2(), spec_f2xf2(), spec_dual(), spec_f4()] {
        let o = Sheaf::structure(&sp.space);
        let z = Sheaf::zero(sp.space.clone());
        let rep = cardinality_audit(&[o, z], Some(&sp), &caps()).unwrap();
        assert!(rep.enumeration_ok);
        assert!(rep.enumeration_checked > 0);
        assert_eq!(rep.distinguished_cover_ok, Some(true));
        audits += 1;
    }
    // hand-built spaces
    for space in [sierpinski(), chain3()] {
        let o = Sheaf::structure(&space);
        let rep = cardinality_audit(&[o], None, &caps()).unwrap();
        assert!(rep.enumeration_ok);
        audits += 1;
    }
    // the documented open counts
    let rep = cardinality_audit(
        &[Sheaf::structure(&spec_f2xf2().space)],
        Some(&spec_f2xf2()),
        &caps(),
    )
    .unwrap();
    assert_eq!(rep.open_count, 4);
    let rep = cardinality_audit(&[Sheaf::structure(&sierpinski())], None, &caps()).unwrap();
    assert_eq!(rep.open_count, 3);
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 5.0, "took {dt:?}");
    println!(
        "PASS cardinality-audit: {} spaces, all section counts match enumeration, distinguished covers verified, {:?}",
        audits, dt
    );
}

