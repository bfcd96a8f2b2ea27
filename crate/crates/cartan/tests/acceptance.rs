//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (run with --nocapture to see them). Every tolerance is pinned
//! here: exhaustive sweeps below dimension 130, seeded sample sizes
//! elsewhere, exact arithmetic throughout.

use cartan::algebra::{derived_subalgebra, CartanAlgebra, Family, GradingKind};
use cartan::auto::{certify, exp_ad, substitution_auto_w, torus_auto};
use cartan::checks;
use cartan::coadjoint::{
    coadjoint_apply, coadjoint_apply_inverse, explicit_flatten_witness, flatten_negative,
    injectivity_witness, lift_to_degree1, random_chi_le1, random_functional, rectify,
    witness_matrix, FlattenOutcome, Functional,
};
use cartan::export::{AlgebraDoc, ImportedTable};
use cartan::invariants::fixed_space;
use cartan::linalg::SparseVec;
use cartan::poly::TruncPoly;
use cartan::suites::corroboration_generators;
use cartan::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

const PARAMS: [(Family, usize, u64, usize); 8] = [
    (Family::W, 1, 5, 5),
    (Family::W, 1, 7, 7),
    (Family::W, 2, 5, 50),
    (Family::S, 2, 5, 23),
    (Family::S, 3, 5, 248),
    (Family::H, 4, 5, 623),
    (Family::K, 3, 5, 125),
    (Family::K, 3, 7, 343),
];

const EXHAUSTIVE_DIM: usize = 130;
const JACOBI_SAMPLES: usize = 100_000;
const RECTIFIER_SAMPLES: usize = 100;
const FLATTENER_SAMPLES: usize = 1000;
const RESTRICTED_SAMPLES: usize = 200;
const SEED: u64 = 20260811;

fn algebra(family: Family, n: usize, p: u64) -> Arc<CartanAlgebra> {
    static CACHE: OnceLock<Mutex<HashMap<(char, usize, u64), Arc<CartanAlgebra>>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (family.letter(), n, p);
    if let Some(l) = cache.lock().unwrap().get(&key) {
        return Arc::clone(l);
    }
    let built = Arc::new(CartanAlgebra::build(family, n, p).expect("build"));
    cache
        .lock()
        .unwrap()
        .entry(key)
        .or_insert_with(|| Arc::clone(&built));
    built
}

fn report(criterion: &str, passed: bool, detail: &str) {
    println!(
        "{} - {criterion}: {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "{criterion}: {detail}");
}

#[test]
fn criterion_01_structure() {
    let t0 = Instant::now();
    let mut detail = String::new();
    for (fam, n, p, expect) in PARAMS {
        let l = algebra(fam, n, p);
        assert_eq!(l.dim(), expect, "{fam}({n}) p={p} dimension");
        assert_eq!(
            checks::expected_dim(fam, n, p),
            expect,
            "{fam}({n}) closed form"
        );
        let (pairs, af) = checks::antisymmetry_exhaustive(&l);
        assert_eq!(af, 0, "{fam}({n}) antisymmetry");
        let (triples, jf) = if l.dim() <= EXHAUSTIVE_DIM {
            checks::jacobi_exhaustive(&l)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED);
            checks::jacobi_random(&l, JACOBI_SAMPLES, &mut rng)
        };
        assert_eq!(jf, 0, "{fam}({n}) jacobi");
        let (_, gf) = checks::grading_respected(&l);
        assert_eq!(gf, 0, "{fam}({n}) gradings");
        let (_, mf) = checks::basis_membership(&l);
        assert_eq!(mf, 0, "{fam}({n}) membership");
        detail.push_str(&format!(
            "{fam}({n})p{p}:dim{} a{pairs} j{triples}; ",
            l.dim()
        ));
    }
    let elapsed = t0.elapsed();
    report(
        "criterion 1 structure",
        elapsed.as_secs() <= 300,
        &format!("{detail}in {elapsed:?} (limit 300s)"),
    );
}

#[test]
fn criterion_02_contact_identities() {
    let l = algebra(Family::K, 3, 5);
    let rep = checks::verify_contact_identities(&l).expect("contact family");
    let closed_checked = rep.unit.0 + rep.linear.0 + rep.grading.0 + rep.quadratic.0 + rep.diagonal.0;
    let ok = rep.total_failures() == 0 && rep.unit.0 == 125 && rep.commutation.0 == 15625;
    report(
        "criterion 2 contact",
        ok,
        &format!(
            "{closed_checked} closed-form checks and {} commutation pairs, {} mismatches {:?}",
            rep.commutation.0,
            rep.total_failures(),
            rep.mismatches
        ),
    );
}

#[test]
fn criterion_03_intertwining() {
    let mut total = 0;
    for (fam, n, p, _) in PARAMS {
        if fam == Family::K {
            continue;
        }
        let l = algebra(fam, n, p);
        let (c, f) = checks::intertwine_check(&l, None).expect("non-contact family");
        assert_eq!(f, 0, "{fam}({n}) p={p} intertwining");
        total += c;
    }
    report(
        "criterion 3 intertwining",
        total > 0,
        &format!("{total} identities checked, 0 failures"),
    );
}

#[test]
fn criterion_04_restrictedness() {
    let mut detail = String::new();
    for (fam, n, p, _) in PARAMS {
        let l = algebra(fam, n, p);
        let (c, f) = if l.dim() <= EXHAUSTIVE_DIM {
            checks::restricted_exhaustive(&l)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED);
            checks::restricted_sampled(&l, RESTRICTED_SAMPLES, &mut rng)
        };
        assert_eq!(f, 0, "{fam}({n}) p={p} restrictedness");
        detail.push_str(&format!("{fam}({n})p{p}:{c}; "));
    }
    report("criterion 4 restrictedness", true, &detail);
}

#[test]
fn criterion_05_rectifier() {
    let mut detail = String::new();
    for (fam, n, p, _) in PARAMS {
        let l = algebra(fam, n, p);
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let mut fallbacks = 0usize;
        for run in 0..RECTIFIER_SAMPLES {
            let chi = random_chi_le1(&l, &mut rng);
            let (g, out, trace) = rectify(&l, &chi)
                .unwrap_or_else(|e| panic!("{fam}({n}) p={p} run {run}: {e}"));
            assert_eq!(out, chi.truncate(&l, 0, 1), "{fam}({n}) run {run} output");
            assert!(
                g.matrix().is_identity() || g.depth() >= 2,
                "{fam}({n}) run {run} depth {}",
                g.depth()
            );
            assert_eq!(
                coadjoint_apply(&l, &g, &chi),
                out,
                "{fam}({n}) run {run} verification"
            );
            fallbacks += trace.fallbacks;
        }
        assert!(
            fallbacks * 20 <= RECTIFIER_SAMPLES,
            "{fam}({n}) p={p}: {fallbacks} fallbacks over {RECTIFIER_SAMPLES} runs exceeds 5%"
        );
        detail.push_str(&format!("{fam}({n})p{p}:100%({fallbacks}fb); "));
    }
    report("criterion 5 rectifier", true, &detail);
}

#[test]
fn criterion_06_flattener() {
    let mut detail = String::new();
    for (fam, n, p, _) in PARAMS {
        if fam == Family::W && n == 1 && p == 5 {
            continue; // excluded case: the corner square does not vanish
        }
        let l = algebra(fam, n, p);
        // the explicit witness functional gives a unit-triangular matrix
        let chi = explicit_flatten_witness(&l)
            .unwrap_or_else(|e| panic!("{fam}({n}) p={p} witness: {e}"));
        let b = witness_matrix(&l, &chi).unwrap();
        assert_eq!(b.rank(), l.n(), "{fam}({n}) p={p} explicit witness rank");
        for s in 0..l.n() {
            for i in 0..=s {
                assert_eq!(
                    b.get(s, i),
                    u64::from(s == i),
                    "{fam}({n}) witness entry ({s},{i})"
                );
            }
        }
        // random functionals: positive invertible fraction, every success
        // verified exactly
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let mut witnessed = 0usize;
        for run in 0..FLATTENER_SAMPLES {
            let chi = random_functional(&l, &mut rng);
            match flatten_negative(&l, &chi, SEED ^ run as u64).unwrap() {
                FlattenOutcome::AlreadyFlat(_) => witnessed += 1,
                FlattenOutcome::Witnessed { auto, y, flattened } => {
                    witnessed += 1;
                    let ad = cartan::auto::ad_matrix(&l, &y);
                    for j in 0..l.dim() {
                        assert!(
                            ad.apply(ad.col(j)).is_empty(),
                            "{fam}({n}) run {run}: adjoint square"
                        );
                    }
                    assert!(flattened.negative_part_is_zero(&l));
                    assert_eq!(flattened, coadjoint_apply_inverse(&l, &auto, &chi));
                }
                FlattenOutcome::SearchWitnessed { .. } => {}
                FlattenOutcome::NotWitnessed { .. } => {}
            }
        }
        assert!(
            witnessed > 0,
            "{fam}({n}) p={p}: no invertible witness matrix over {FLATTENER_SAMPLES} samples"
        );
        detail.push_str(&format!(
            "{fam}({n})p{p}:{witnessed}/{FLATTENER_SAMPLES}; "
        ));
    }
    report("criterion 6 flattener", true, &detail);
}

#[test]
fn criterion_07_injectivity() {
    let mut detail = String::new();
    for (fam, n, p, _) in PARAMS {
        let l = algebra(fam, n, p);
        // full rank is asserted inside the constructor
        let (_, coords) = injectivity_witness(&l)
            .unwrap_or_else(|e| panic!("{fam}({n}) p={p}: {e}"));
        let dim0 = l.graded_component(0, GradingKind::Standard).len();
        // and the lift solves for a seeded degree-zero functional
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let mut chi0 = Functional::zero(l.dim());
        for s in l.graded_component(0, GradingKind::Standard) {
            chi0.set(s, rng.gen_range(0..p));
        }
        lift_to_degree1(&l, &chi0, &coords)
            .unwrap_or_else(|e| panic!("{fam}({n}) p={p} lift: {e}"));
        detail.push_str(&format!("{fam}({n})p{p}:rank{dim0}; "));
    }
    report("criterion 7 injectivity", true, &detail);
}

#[test]
fn criterion_08_invariant_fixed_space() {
    let t0 = Instant::now();
    let mut detail = String::new();
    for (fam, n, p, d) in [
        (Family::W, 1, 5, 4u32),
        (Family::W, 1, 7, 4),
        (Family::S, 2, 5, 2),
        (Family::K, 3, 5, 2),
    ] {
        let l = algebra(fam, n, p);
        let gens = corroboration_generators(&l);
        let refs: Vec<&cartan::auto::LinearAuto> = gens.iter().map(|(_, g)| g).collect();
        let basis = fixed_space(&l, d, &refs);
        assert_eq!(
            basis.len(),
            1,
            "{fam}({n}) p={p} degree {d}: fixed space dimension {} is inconclusive",
            basis.len()
        );
        assert_eq!(basis[0].total_degree(), 0, "survivor is a constant");
        detail.push_str(&format!("{fam}({n})p{p}d{d}:dim1({}gens); ", gens.len()));
    }
    let elapsed = t0.elapsed();
    report(
        "criterion 8 invariants",
        elapsed.as_secs() <= 600,
        &format!("{detail}in {elapsed:?} (limit 600s)"),
    );
}

#[test]
fn criterion_09_certification() {
    // torus elements certify everywhere
    for (fam, n, p, _) in PARAMS {
        let l = algebra(fam, n, p);
        for t in 1..p {
            let g = torus_auto(&l, t).unwrap_or_else(|e| panic!("torus({t}) on {fam}({n}): {e}"));
            assert!(g.is_graded());
        }
    }
    // variable permutations on the W family
    let l = algebra(Family::W, 2, 5);
    let p = l.prime();
    let swap = vec![TruncPoly::var(2, 2, p), TruncPoly::var(1, 2, p)];
    let g = substitution_auto_w(&l, &swap).expect("permutation certifies");
    assert!(g.is_graded());
    // the exponentials used by the corroboration recipe certify by
    // construction; the generator lists are nonempty at every set
    for (fam, n, p, _) in PARAMS {
        let l = algebra(fam, n, p);
        let gens = corroboration_generators(&l);
        assert!(!gens.is_empty(), "{fam}({n}) p={p} generator recipe");
    }
    // a mutated matrix fails certification with a witness pair
    let good = torus_auto(&l, 2).unwrap();
    let bad = good.matrix().with_entry(0, 7, 3);
    let err = certify(&l, bad, None).expect_err("mutation must fail");
    let witnessed = matches!(err, Error::BracketViolation { .. } | Error::NotInvertible);
    report(
        "criterion 9 certification",
        witnessed,
        &format!("mutation rejected with: {err}"),
    );
}

#[test]
fn criterion_10_export_determinism() {
    let l = algebra(Family::W, 2, 5);
    let json1 = AlgebraDoc::from_algebra(&l).to_json();
    let doc = AlgebraDoc::from_json(&json1).expect("parse");
    let table = ImportedTable::new(doc).expect("table");
    let json2 = table.to_json();
    assert_eq!(json1, json2, "round trip must be byte-identical");
    // re-import the re-export for good measure
    let json3 = ImportedTable::new(AlgebraDoc::from_json(&json2).unwrap())
        .unwrap()
        .to_json();
    assert_eq!(json1, json3);
    // imported table reproduces the polynomial bracket on random pairs
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..100 {
        let i = rng.gen_range(0..l.dim());
        let j = rng.gen_range(0..l.dim());
        let poly = l.basis_element(i).bracket(l.basis_element(j));
        let expected: SparseVec = l.express(&poly).unwrap();
        assert_eq!(table.bracket_basis(i, j), expected, "pair ({i}, {j})");
    }
    report(
        "criterion 10 export",
        true,
        "byte-identical round trip; 100 random pairs match the polynomial route",
    );
}

#[test]
fn supplementary_derived_series() {
    // the derived-subalgebra oracle identifies the simple pieces
    let s = algebra(Family::S, 2, 5);
    let elems: Vec<_> = (0..s.dim()).map(|k| s.basis_element(k).clone()).collect();
    assert_eq!(derived_subalgebra(&elems).len(), 23);
    let k = algebra(Family::K, 3, 5);
    let elems: Vec<_> = (0..k.dim()).map(|i| k.basis_element(i).clone()).collect();
    assert_eq!(derived_subalgebra(&elems).len(), 125);
    // exponential example: exp(ad y) for a top-degree element on seven
    // points is the two-term series
    let w = algebra(Family::W, 1, 7);
    let y: SparseVec = vec![(5, 1)];
    let g = exp_ad(&w, &y).expect("two-term exponential certifies");
    assert!(g.depth() >= 4);
    report("supplementary derived series", true, "S(2) and K(3) stable");
}
