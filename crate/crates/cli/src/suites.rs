//! The verification suites. Each one walks the workspace, runs the
//! corresponding checks with seeded sampling, and emits a deterministic
//! report: same document, seed and bounds give byte-identical output.

use std::sync::Arc;

use dgperf_core::dgcat::{
    cone, euler_characteristics, hom_slice, is_acyclic, DComplex, DComplexRef, HomElement,
    SheafComplex,
};
use dgperf_core::drinfeld::{
    derived_hom_oracle, h0_compare, quasi_inverse, resolution_hom_element, OracleOutcome,
    Quotient,
};
use dgperf_core::error::{Caps, Error};
use dgperf_core::fixtures;

use dgperf_core::rectify::{
    block_dmorphism, check_strict_functoriality, check_theta_cocycle, DMorphism, DObject,
};
use dgperf_core::ringedspace::SpaceRef;
use dgperf_core::sample;
use dgperf_core::sheaf::{
    ext_by_zero, hom_sheaf, sections, sections_map, sigma_forward, Sheaf, SheafMap,
};

use crate::document::Workspace;
use crate::report::{Bounds, Report, Verdict};

pub const SUITES: &[&str] = &[
    "functoriality",
    "theta-cocycle",
    "sigma-naturality",
    "dg-laws",
    "resolve",
    "cover",
    "audit",
    "quotient",
    "h0-compare",
];

pub fn run_suite(name: &str, ws: &Workspace, bounds: &Bounds) -> Result<Report, String> {
    let start = std::time::Instant::now();
    let mut rep = match name {
        "functoriality" => functoriality(ws, bounds),
        "theta-cocycle" => theta_cocycle(ws, bounds),
        "sigma-naturality" => sigma_naturality(ws, bounds),
        "dg-laws" => dg_laws(ws, bounds),
        "resolve" => resolve_suite(ws, bounds),
        "cover" => cover_suite(ws, bounds),
        "audit" => audit_suite(ws, bounds),
        "quotient" => quotient_suite(ws, bounds),
        "h0-compare" => h0_compare_suite(ws, bounds),
        _ => Err(format!(
            "unknown suite '{name}'; available: {}",
            SUITES.join(", ")
        )),
    }?;
    rep.finalize();
    rep.wall_ms = start.elapsed().as_millis();
    Ok(rep)
}

fn chains_of(ws: &Workspace) -> Vec<(String, dgperf_core::ringedspace::RingedMap, dgperf_core::ringedspace::RingedMap)> {
    ws.chains
        .iter()
        .map(|(id, (g_id, f_id))| {
            (
                id.clone(),
                ws.maps[g_id].clone(),
                ws.maps[f_id].clone(),
            )
        })
        .collect()
}

fn functoriality(ws: &Workspace, bounds: &Bounds) -> Result<Report, String> {
    let mut rep = Report::new("functoriality", bounds);
    for (id, g, f) in chains_of(ws) {
        let space = f.target().clone();
        let opens = space.opens(&ws.caps).map_err(|e| e.to_string())?;
        let objects: Vec<DObject> = opens
            .iter()
            .map(|v| DObject::new(space.clone(), vec![v.clone()]).unwrap())
            .collect();
        let mut r = sample::rng(bounds.seed);
        let morphisms: Vec<DMorphism> = (0..bounds.samples)
            .map(|_| sample::random_dmorphism(&space, &opens, 2, &mut r).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        let check =
            check_strict_functoriality(&f, &g, &objects, &morphisms).map_err(|e| e.to_string())?;
        let verdict = if check.ok() { Verdict::Pass } else { Verdict::Fail };
        rep.push(
            format!("chain:{id}"),
            &format!("{id}:{}:{}", bounds.seed, bounds.samples),
            verdict,
            check.failures.first().cloned(),
        );
    }
    Ok(rep)
}

fn theta_cocycle(ws: &Workspace, bounds: &Bounds) -> Result<Report, String> {
    let mut rep = Report::new("theta-cocycle", bounds);
    for (id, g, f) in chains_of(ws) {
        let s_space = f.target().clone();
        let u_space = g.source().clone();
        let mut samples = vec![Sheaf::structure(&u_space), Sheaf::zero(u_space.clone())];
        for v in u_space.opens(&ws.caps).map_err(|e| e.to_string())? {
            samples.push(ext_by_zero(&u_space, &v));
        }
        for w in s_space.opens(&ws.caps).map_err(|e| e.to_string())? {
            let check =
                check_theta_cocycle(&f, &g, &w, &samples).map_err(|e| e.to_string())?;
            let verdict = if check.ok() { Verdict::Pass } else { Verdict::Fail };
            rep.push(
                format!("chain:{id}:w:{:?}", w.points()),
                &format!("{id}:{:?}", w.points()),
                verdict,
                check.failures.first().cloned(),
            );
        }
    }
    Ok(rep)
}

fn sigma_naturality(ws: &Workspace, bounds: &Bounds) -> Result<Report, String> {
    let mut rep = Report::new("sigma-naturality", bounds);
    for (sid, space) in &ws.spaces {
        let o = Sheaf::structure(space);
        let mut r = sample::rng(bounds.seed);
        for v in space.opens(&ws.caps).map_err(|e| e.to_string())? {
            let ov = ext_by_zero(space, &v);
            let mut failures: Vec<String> = Vec::new();
            let mut checked = 0usize;
            for _ in 0..bounds.samples.min(20) {
                let Some(phi) = sample::random_sheaf_map(&o, &o, &mut r).map_err(|e| e.to_string())?
                else {
                    continue;
                };
                for psi in hom_sheaf(&ov, &o).map_err(|e| e.to_string())? {
                    let fam1 = sigma_forward(&phi.compose(&psi).unwrap(), &v);
                    let fam2_pre = sigma_forward(&psi, &v);
                    let src_sec = sections(&o, &v).map_err(|e| e.to_string())?;
                    let gm = sections_map(&phi, &src_sec, &src_sec);
                    let coords = src_sec.express(&fam2_pre).unwrap();
                    let fam2 = src_sec.ambient(&gm.apply(&coords));
                    if fam1 != fam2 {
                        failures.push(format!("square fails over {:?}", v.points()));
                    }
                    checked += 1;
                }
            }
            let verdict = if failures.is_empty() { Verdict::Pass } else { Verdict::Fail };
            rep.push(
                format!("space:{sid}:open:{:?}", v.points()),
                &format!("{sid}:{:?}:{checked}", v.points()),
                verdict,
                failures.first().cloned(),
            );
        }
    }
    Ok(rep)
}

fn dg_laws(ws: &Workspace, bounds: &Bounds) -> Result<Report, String> {
    let mut rep = Report::new("dg-laws", bounds);
    for (sid, space) in &ws.spaces {
        let opens = space.opens(&ws.caps).map_err(|e| e.to_string())?;
        let mut r = sample::rng(bounds.seed);
        let mut failures: Vec<String> = Vec::new();
        let mut elements = 0usize;
        for _ in 0..(bounds.samples / 10).max(3) {
            let e = Arc::new(
                sample::random_two_term_complex(space, &opens, 2, 0, &mut r)
                    .map_err(|e| e.to_string())?,
            );
            let f = Arc::new(
                sample::random_three_term_complex(space, &opens, 2, -1, &mut r)
                    .map_err(|e| e.to_string())?,
            );
            for deg in [-1, 0, 1] {
                let phi = sample::random_hom_element(&e, &f, deg, &mut r)
                    .map_err(|e| e.to_string())?;
                if !phi.differential().differential().is_zero() {
                    failures.push(format!("d^2 != 0 at degree {deg}"));
                }
                let psi = sample::random_hom_element(&f, &e, 0, &mut r)
                    .map_err(|e| e.to_string())?;
                let lhs = psi.compose(&phi).unwrap().differential();
                let rhs = psi
                    .differential()
                    .compose(&phi)
                    .unwrap()
                    .add(&psi.compose(&phi.differential()).unwrap());
                if lhs != rhs {
                    failures.push(format!("Leibniz fails at degree {deg}"));
                }
                elements += 2;
            }
            let c = cone(&HomElement::identity(&e)).map_err(|e| e.to_string())?;
            if !is_acyclic(&c.cone).map_err(|e| e.to_string())?.acyclic {
                failures.push("cone(id) is not acyclic".into());
            }
            // Euler identity on a sampled cone
            let s0 = hom_slice(&e, &f, 0).map_err(|e| e.to_string())?;
            let s1 = hom_slice(&e, &f, 1).map_err(|e| e.to_string())?;
            let kernel = s0
                .differential_matrix(&s1)
                .map_err(|e| e.to_string())?
                .kernel();
            if kernel.cols() > 0 {
                let coeffs: Vec<u32> = (0..kernel.cols())
                    .map(|_| rand::Rng::gen_range(&mut r, 0..space.p()))
                    .collect();
                let s = s0.element(&kernel.apply(&coeffs)).map_err(|e| e.to_string())?;
                let c = cone(&s).map_err(|e| e.to_string())?;
                let chi_c = euler_characteristics(&c.cone.realize().map_err(|e| e.to_string())?);
                let chi_e = euler_characteristics(&e.realize().map_err(|e| e.to_string())?);
                let chi_f = euler_characteristics(&f.realize().map_err(|e| e.to_string())?);
                for x in 0..space.n_points() {
                    if chi_c[x] != chi_f[x] - chi_e[x] {
                        failures.push(format!("Euler identity fails at point {x}"));
                    }
                }
            }
        }
        let verdict = if failures.is_empty() { Verdict::Pass } else { Verdict::Fail };
        rep.push(
            format!("space:{sid}"),
            &format!("{sid}:{}:{elements}", bounds.seed),
            verdict,
            failures.first().cloned(),
        );
    }
    if bounds.debug_flip_cone_sign {
        // negative control on an odd-characteristic point so the flipped
        // sign is visible: build [[d_F, phi], [0, +d_E]] and watch d^2 fail
        let (id, digest, verdict, witness) = flipped_cone_control();
        rep.push(id, &digest, verdict, witness);
    }
    Ok(rep)
}

fn flipped_cone_control() -> (String, String, Verdict, Option<String>) {
    let f3 = fixtures::f3();
    let caps = Caps::default();
    let sp = dgperf_core::ringedspace::spec(&f3, &caps).unwrap();
    let space = sp.space.clone();
    let x = DObject::new(space.clone(), vec![space.whole()]).unwrap();
    let e = Arc::new(DComplex::two_term(0, DMorphism::identity(&x)));
    let phi = HomElement::identity(&e);
    // the deliberately mis-signed differential: [[d_F, phi], [0, +d_E]]
    let lo = e.lo() - 1;
    let hi = e.hi();
    let mut comps = Vec::new();
    for n in lo..=hi {
        comps.push(e.component(n).concat(&e.component(n + 1)));
    }
    let mut diffs = Vec::new();
    for n in lo..hi {
        let df = e.differential(n);
        let de = e.differential(n + 1); // sign NOT flipped: wrong on purpose
        let ph = phi.component(n + 1);
        let f_n = e.component(n);
        let e_n1 = e.component(n + 1);
        let f_n1 = e.component(n + 1);
        let e_n2 = e.component(n + 2);
        diffs.push(
            block_dmorphism(
                &[&f_n, &e_n1],
                &[&f_n1, &e_n2],
                &[vec![Some(&df), Some(&ph)], vec![None, Some(&de)]],
            )
            .unwrap(),
        );
    }
    match DComplex::new(space, lo, comps, diffs) {
        Err(err) => (
            "debug:flipped-cone".into(),
            "flipped-cone-f3".into(),
            Verdict::Fail,
            Some(format!("sign-flipped cone rejected as expected: {err}")),
        ),
        Ok(_) => (
            "debug:flipped-cone".into(),
            "flipped-cone-f3".into(),
            Verdict::Fail,
            Some("sign-flipped cone unexpectedly satisfied d^2 = 0".into()),
        ),
    }
}

fn resolve_suite(ws: &Workspace, bounds: &Bounds) -> Result<Report, String> {
    let mut rep = Report::new("resolve", bounds);
    let mut inputs: Vec<(String, SheafComplex)> = Vec::new();
    for (id, c) in &ws.complexes {
        inputs.push((format!("complex:{id}"), c.realize().map_err(|e| e.to_string())?));
    }
    for (id, s) in &ws.sheaves {
        inputs.push((format!("sheaf:{id}"), SheafComplex::concentrated(s.clone(), 0)));
    }
    for (id, e) in inputs {
        match dgperf_core::resolve::resolve(&e, bounds.depth) {
            Ok(res) => {
                let check = res.verify().map_err(|e| e.to_string())?;
                let verdict = if check.ok() { Verdict::Pass } else { Verdict::Fail };
                let note = if res.complete {
                    None
                } else {
                    Some(format!(
                        "incomplete at depth {}; validity from degree {:?}",
                        bounds.depth, res.validity_lo
                    ))
                };
                rep.push(
                    id.clone(),
                    &format!("{id}:{}", bounds.depth),
                    verdict,
                    check.failures.first().cloned().or(note),
                );
            }
            Err(e) => {
                rep.push(id.clone(), &id, Verdict::Fail, Some(e.to_string()));
            }
        }
    }
    Ok(rep)
}

fn cover_suite(ws: &Workspace, bounds: &Bounds) -> Result<Report, String> {
    let mut rep = Report::new("cover", bounds);
    for (id, s) in &ws.sheaves {
        let pi = SheafMap::identity(s);
        match dgperf_core::resolve::cover_epi(&pi, &ws.caps) {
            Ok(res) => {
                // independent count: sum over opens of the section counts
                let mut exact = 0usize;
                for v in s.space().opens(&ws.caps).map_err(|e| e.to_string())? {
                    let gamma = sections(s, &v).map_err(|e| e.to_string())?;
                    exact += (s.space().p() as usize).pow(gamma.dim() as u32);
                }
                let ok = res.composite.is_epi() && res.j_count() == exact;
                rep.push(
                    format!("sheaf:{id}"),
                    &format!("{id}"),
                    if ok { Verdict::Pass } else { Verdict::Fail },
                    if ok {
                        None
                    } else {
                        Some(format!("|J| = {} expected {exact}", res.j_count()))
                    },
                );
            }
            Err(Error::NotEpi) => {
                rep.push(
                    format!("sheaf:{id}"),
                    &format!("{id}"),
                    Verdict::Fail,
                    Some("identity map reported non-epi".into()),
                );
            }
            Err(e) => {
                rep.push(format!("sheaf:{id}"), &format!("{id}"), Verdict::Fail, Some(e.to_string()));
            }
        }
    }
    Ok(rep)
}

fn audit_suite(ws: &Workspace, bounds: &Bounds) -> Result<Report, String> {
    let mut rep = Report::new("audit", bounds);
    for (sid, space) in &ws.spaces {
        let sheaves: Vec<Sheaf> = ws
            .sheaves
            .iter()
            .filter(|(_, s)| s.space() == space)
            .map(|(_, s)| s.clone())
            .collect();
        let all = if sheaves.is_empty() {
            vec![Sheaf::structure(space)]
        } else {
            sheaves
        };
        let audit = dgperf_core::resolve::cardinality_audit(
            &all,
            ws.spec_spaces.get(sid),
            &ws.caps,
        )
        .map_err(|e| e.to_string())?;
        let ok = audit.enumeration_ok && audit.distinguished_cover_ok.unwrap_or(true);
        rep.push(
            format!("space:{sid}"),
            &format!("{sid}:{}", audit.open_count),
            if ok { Verdict::Pass } else { Verdict::Fail },
            if ok {
                None
            } else {
                Some("audit mismatch".into())
            },
        );
    }
    Ok(rep)
}

fn quotient_suite(ws: &Workspace, bounds: &Bounds) -> Result<Report, String> {
    let mut rep = Report::new("quotient", bounds);
    for (sid, space) in &ws.spaces {
        let q = Quotient::new(space.clone());
        let opens = space.opens(&ws.caps).map_err(|e| e.to_string())?;
        let mut r = sample::rng(bounds.seed);
        let mut failures: Vec<String> = Vec::new();
        // registered acyclics are contractible, and d^2 = 0 on words
        for _ in 0..3 {
            let e = Arc::new(
                sample::random_two_term_complex(space, &opens, 2, 0, &mut r)
                    .map_err(|e| e.to_string())?,
            );
            let c = cone(&HomElement::identity(&e)).map_err(|e| e.to_string())?;
            let cid = q.adjoin_acyclic(&c.cone).map_err(|e| e.to_string())?;
            let eps = q.epsilon(cid).map_err(|e| e.to_string())?;
            let id_c = q
                .from_hom(&HomElement::identity(&c.cone))
                .map_err(|e| e.to_string())?;
            if q.differential(&eps).map_err(|e| e.to_string())? != id_c {
                failures.push("d(eps) != id".into());
            }
            let dd = q
                .differential(&q.differential(&eps).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            if !dd.is_zero() {
                failures.push("d^2 != 0 on epsilon".into());
            }
        }
        // quasi-inverse identities, including one produced by resolve
        for (cid_str, cplx) in ws.complexes.iter().filter(|(_, c)| c.space() == space) {
            if quasi_inverse(&q, &HomElement::identity(cplx)).is_err() {
                // identity is only a quasi-isomorphism when the cone is
                // acyclic, which always holds for cone(id); report if not
                failures.push(format!("quasi-inverse of id fails for {cid_str}"));
            }
            let realized = cplx.realize().map_err(|e| e.to_string())?;
            match dgperf_core::resolve::resolve(&realized, bounds.depth) {
                Ok(res) if res.complete => {
                    let p_cplx: DComplexRef = Arc::new(res.complex.clone());
                    let s = resolution_hom_element(&res, &p_cplx, cplx)
                        .map_err(|e| e.to_string())?;
                    if let Err(e) = quasi_inverse(&q, &s) {
                        failures.push(format!("resolve-produced quasi-inverse fails: {e}"));
                    }
                }
                Ok(_) => {}
                Err(e) => failures.push(format!("resolve fails for {cid_str}: {e}")),
            }
        }
        let verdict = if failures.is_empty() { Verdict::Pass } else { Verdict::Fail };
        rep.push(
            format!("space:{sid}"),
            &format!("{sid}:{}", bounds.seed),
            verdict,
            failures.first().cloned(),
        );
    }
    Ok(rep)
}

fn h0_compare_suite(ws: &Workspace, bounds: &Bounds) -> Result<Report, String> {
    let mut rep = Report::new("h0-compare", bounds);
    let spaces: Vec<(&String, &SpaceRef)> = ws.spaces.iter().collect();
    for (sid, space) in spaces {
        let cplxs: Vec<(&String, &DComplexRef)> = ws
            .complexes
            .iter()
            .filter(|(_, c)| c.space() == space)
            .collect();
        if cplxs.is_empty() {
            continue;
        }
        let q_s = Quotient::new(space.clone());
        // a map whose target is this space enables the pullback square
        let square = ws
            .maps
            .iter()
            .find(|(_, m)| m.target() == space)
            .map(|(mid, m)| (mid.clone(), m.clone()));
        for (eid, e) in &cplxs {
            for (fid, f_cplx) in &cplxs {
                let case_id = format!("space:{sid}:pair:{eid}->{fid}");
                let q_t = square
                    .as_ref()
                    .map(|(_, m)| Quotient::new(m.source().clone()));
                let square_arg = match (&square, &q_t) {
                    (Some((_, m)), Some(qt)) => Some((m, qt)),
                    _ => None,
                };
                match h0_compare(
                    &q_s,
                    e,
                    f_cplx,
                    square_arg,
                    bounds.eps_bound,
                    bounds.depth,
                ) {
                    Ok(check) => {
                        let verdict = if check.ok() { Verdict::Pass } else { Verdict::Fail };
                        rep.push(
                            case_id.clone(),
                            &format!("{eid}:{fid}:{}", bounds.eps_bound),
                            verdict,
                            check.failures.first().cloned(),
                        );
                    }
                    Err(Error::OracleUnavailable(msg)) => {
                        rep.push(
                            case_id.clone(),
                            &format!("{eid}:{fid}"),
                            Verdict::Reported,
                            Some(format!("oracle unavailable: {msg}")),
                        );
                    }
                    Err(e) => {
                        rep.push(case_id.clone(), &case_id, Verdict::Fail, Some(e.to_string()));
                    }
                }
            }
        }
    }
    // the documented skyscraper fixture: oracle truncation is a reported
    // outcome, with the stabilized answer when the window suffices
    {
        let sky = fixtures::skyscraper_spec_dual();
        let es = SheafComplex::concentrated(sky, 0);
        match derived_hom_oracle(&es, &es, bounds.depth) {
            Ok(OracleOutcome::TruncationStable { dim, truncated_at, .. }) => {
                rep.push(
                    "fixture:skyscraper-dual".into(),
                    "skyscraper",
                    Verdict::Reported,
                    Some(format!(
                        "resolution truncated at degree {truncated_at}; stabilized H0 dim {dim}"
                    )),
                );
            }
            Ok(OracleOutcome::Exact { .. }) => {
                rep.push(
                    "fixture:skyscraper-dual".into(),
                    "skyscraper",
                    Verdict::Fail,
                    Some("skyscraper resolution cannot complete".into()),
                );
            }
            Err(e) => {
                rep.push(
                    "fixture:skyscraper-dual".into(),
                    "skyscraper",
                    Verdict::Reported,
                    Some(format!("oracle unavailable: {e}")),
                );
            }
        }
    }
    Ok(rep)
}

