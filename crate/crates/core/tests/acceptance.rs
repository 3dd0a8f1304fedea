//! Acceptance criteria, one line per criterion. Exits nonzero on any failure.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cork_core::grouppres::{trivialize_search, AbelianWitness, Move, Presentation, SearchConfig, Word};
use cork_core::intmat::{smith_normal_form, unimodular_reduce, IntMatError, IntMatrix, RowColOp};
use cork_core::kirby::{
    akbulut_cork, apply_involution, boundary_homology, four_manifold_homology, trade_handle, Component, KirbyDiagram,
    Role,
};
use cork_core::middle::{
    build_middle, check_sequential_killing, dot_side, Ambient, AmbientHandle, ArcOrdering, PairPoints, SpherePair,
};
use cork_core::pipeline::{
    extract, stage1_normalize, stage2_build, verify_certificate, Budgets, CobordismScenario, Status,
};
use cork_core::slides::{double_slide, ArcClass, DualState, HandleId};

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn scenario(name: &str) -> CobordismScenario {
    CobordismScenario::from_json(&std::fs::read_to_string(fixtures().join(name)).unwrap()).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_akbulut_homology() -> Outcome {
    let a = akbulut_cork();
    let h = four_manifold_homology(&a);
    ensure(h.degree(1).is_trivial(), || format!("H1 = {}", h.degree(1)))?;
    ensure(h.degree(2).free_rank == 2 && h.degree(2).torsion.is_empty(), || {
        format!("H2 = {}", h.degree(2))
    })?;
    let b = boundary_homology(&a);
    ensure(b.is_trivial(), || format!("boundary H1 = {b}"))?;
    for c in 0..2 {
        let t = trade_handle(&a, c).map_err(|e| e.to_string())?;
        let ht = four_manifold_homology(&t);
        ensure(ht.degree(1).is_trivial() && ht.degree(2).is_trivial(), || {
            format!("traded {c}: {ht:?}")
        })?;
        ensure(boundary_homology(&t) == b, || {
            format!("boundary changed after trading {c}")
        })?;
    }
    Ok("H1 = 0, H2 = Z^2; traded sides acyclic; boundary H1 = 0 throughout".to_string())
}

fn random_diagram(rng: &mut ChaCha8Rng) -> KirbyDiagram {
    let n = rng.gen_range(1..=6);
    let comps: Vec<Component> = (0..n)
        .map(|_| match rng.gen_range(0..3) {
            0 => Component::dotted(),
            1 => Component::framed(0, true),
            _ => Component::framed(rng.gen_range(-3..=3), rng.gen_bool(0.5)),
        })
        .collect();
    let upper: Vec<Vec<i64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.gen_range(-2..=2)).collect())
        .collect();
    let linking: Vec<Vec<i64>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| match (a.cmp(&b), comps[a].role) {
                    (std::cmp::Ordering::Equal, Role::Dotted) => 0,
                    (std::cmp::Ordering::Equal, Role::Framed(k)) => k,
                    (std::cmp::Ordering::Less, _) => upper[a][b],
                    (std::cmp::Ordering::Greater, _) => upper[b][a],
                })
                .collect()
        })
        .collect();
    KirbyDiagram::new(comps, linking).unwrap()
}

fn c2_trade_involution() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut trades = 0;
    for case in 0..100 {
        let d = random_diagram(&mut rng);
        let before = boundary_homology(&d);
        for c in 0..d.components().len() {
            let Ok(once) = trade_handle(&d, c) else { continue };
            trades += 1;
            ensure(boundary_homology(&once) == before, || {
                format!("diagram {case}: boundary changed at {c}")
            })?;
            let twice = trade_handle(&once, c).map_err(|e| format!("diagram {case}: {e}"))?;
            ensure(twice == d, || {
                format!("diagram {case}: trading {c} twice is not the identity")
            })?;
        }
    }
    ensure(trades > 100, || format!("only {trades} tradeable components"))?;
    Ok(format!("100 diagrams, {trades} trades"))
}

fn c3_symmetry() -> Outcome {
    let (_, sym) = apply_involution(&akbulut_cork(), &[1, 0]).map_err(|e| e.to_string())?;
    ensure(sym, || "swap is not a symmetry".to_string())?;
    Ok("is_symmetry = true".to_string())
}

/// Fraction-free Gaussian elimination over i128.
fn bareiss_det(rows: &[Vec<i64>]) -> i128 {
    let n = rows.len();
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&r| m[r][k] != 0) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

fn c4_unimodular() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..1000 {
        let n = rng.gen_range(1..=6);
        let mut m = IntMatrix::identity(n);
        for _ in 0..rng.gen_range(0..=12) {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            let op = match rng.gen_range(0..4) {
                0 if a != b => RowColOp::add_row(a, b, *[-3i64, -2, -1, 1, 2, 3].choose(&mut rng).unwrap()),
                1 if a != b => RowColOp::add_col(a, b, *[-3i64, -2, -1, 1, 2, 3].choose(&mut rng).unwrap()),
                2 => RowColOp::SwapRows(a, b),
                _ => RowColOp::NegateCol(a),
            };
            m.apply(&op).unwrap();
        }
        let r = unimodular_reduce(&m).map_err(|e| format!("case {case}: {e}"))?;
        ensure(r.result.is_identity(), || format!("case {case}: result not identity"))?;
        let replayed = m.replay(&r.ops).map_err(|e| format!("case {case}: {e}"))?;
        ensure(replayed.is_identity(), || {
            format!("case {case}: op log does not replay to identity")
        })?;
    }
    let mut rejected = 0;
    while rejected < 1000 {
        let n = rng.gen_range(1..=6);
        let rows: Vec<Vec<i64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(-3..=3)).collect())
            .collect();
        let det = bareiss_det(&rows);
        if det.abs() == 1 {
            continue;
        }
        let m = IntMatrix::from_rows(&rows, n).unwrap();
        match unimodular_reduce(&m) {
            Err(IntMatError::NonUnimodular { det: d }) => ensure(d.to_string() == det.to_string(), || {
                format!("{rows:?}: reported det {d}, expected {det}")
            })?,
            other => return Err(format!("{rows:?} (det {det}) gave {other:?}")),
        }
        rejected += 1;
    }
    Ok("1000 unimodular reduced and replayed; 1000 non-unimodular rejected with determinant".to_string())
}

fn random_word(rng: &mut ChaCha8Rng, rank: usize, max: usize) -> Word {
    if rank == 0 {
        return Word::empty();
    }
    let len = rng.gen_range(0..=max);
    let letters: Vec<i32> = (0..len)
        .map(|_| {
            let g = rng.gen_range(1..=rank as i32);
            if rng.gen_bool(0.5) {
                g
            } else {
                -g
            }
        })
        .collect();
    Word::of(&letters)
}

fn snf(p: &Presentation) -> Vec<String> {
    smith_normal_form(&p.abelianize())
        .diagonal_entries()
        .iter()
        .map(|d| d.to_string())
        .collect()
}

fn c5_slide_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..500 {
        let r1 = rng.gen_range(1..=3);
        let r3 = rng.gen_range(1..=3);
        let h = rng.gen_range(2..=4);
        let l1: Vec<Word> = (0..h).map(|_| random_word(&mut rng, r1, 5)).collect();
        let l3: Vec<Word> = (0..h).map(|_| random_word(&mut rng, r3, 5)).collect();
        let s = DualState::new(
            Presentation::new(r1, l1).unwrap(),
            Presentation::new(r3, l3).unwrap(),
            (0..h).map(HandleId::Ambient).collect(),
        )
        .unwrap();
        let alpha = rng.gen_range(0..h);
        let beta = (alpha + rng.gen_range(1..h)) % h;
        let g1 = random_word(&mut rng, r1, 3);
        let lambda = ArcClass::new(g1.clone(), random_word(&mut rng, r3, 3));
        let mu = ArcClass::new(g1, random_word(&mut rng, r3, 3));
        let out = double_slide(&s, alpha, beta, lambda, mu).map_err(|e| e.to_string())?;
        ensure(
            out.l1().relator(alpha).reduced_signed() == s.l1().relator(alpha).reduced_signed(),
            || format!("case {case}: r_alpha changed with equal lower arcs"),
        )?;
        let lambda = ArcClass::new(random_word(&mut rng, r1, 3), random_word(&mut rng, r3, 3));
        let mu = ArcClass::new(random_word(&mut rng, r1, 3), random_word(&mut rng, r3, 3));
        let general = double_slide(&s, alpha, beta, lambda, mu).map_err(|e| e.to_string())?;
        for t in [&out, &general] {
            ensure(snf(t.l1()) == snf(s.l1()) && snf(t.l3()) == snf(s.l3()), || {
                format!("case {case}: Smith form changed")
            })?;
        }
    }
    Ok("500 states; r_alpha fixed when lambda.g1 = mu.g1; Smith forms preserved".to_string())
}

fn random_sphere_pair(rng: &mut ChaCha8Rng) -> SpherePair {
    let n = rng.gen_range(1..=3);
    let mut pairs = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            let counts: &[usize] = if i == j { &[1, 3, 5] } else { &[0, 2, 4] };
            let k = *counts.choose(rng).unwrap();
            if k == 0 {
                continue;
            }
            let target = i32::from(i == j);
            let plus = (k as i32 + target) / 2;
            let mut signs: Vec<i32> = (0..k as i32).map(|x| if x < plus { 1 } else { -1 }).collect();
            signs.shuffle(rng);
            pairs.push(PairPoints { i, j, signs });
        }
    }
    SpherePair::new(n, pairs).unwrap()
}

/// Exponent sums of the partner generators in each undotted word.
fn block_sums(ml: &cork_core::middle::MiddleLevel, side: u8) -> Vec<Vec<i64>> {
    let d = dot_side(ml, side);
    let n = ml.n();
    d.y_part
        .relators()
        .iter()
        .map(|w| (1..=n as u32).map(|g| w.exponent_sum(g)).collect())
        .collect()
}

fn c6_addendum_c() -> Outcome {
    let sc = scenario("akbulut.json");
    let s1 = stage1_normalize(&sc).map_err(|e| e.to_string())?;
    let mut middles = vec![stage2_build(&sc, &s1).map_err(|e| e.to_string())?];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let sp = random_sphere_pair(&mut rng);
        let p = sp.geometric_count();
        let ambient = Ambient {
            r: 0,
            t: 0,
            handles: (1..=p as i32)
                .map(|g| AmbientHandle {
                    relator_l1: Word::of(&[g]),
                    relator_l3: Word::empty(),
                })
                .collect(),
            sphere_duals: Vec::new(),
        };
        middles.push(build_middle(sp, ambient, ArcOrdering::Careful).map_err(|e| e.to_string())?);
    }
    for (case, ml) in middles.iter().enumerate() {
        let n = ml.n();
        let identity: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        for side in 0..2 {
            ensure(block_sums(ml, side) == identity, || {
                format!("scenario {case} side {side}: not the identity")
            })?;
        }
        match check_sequential_killing(ml) {
            cork_core::grouppres::TriState::Yes { evidence } => {
                ensure(evidence.block_sums == [identity.clone(), identity], || {
                    format!("scenario {case}: evidence")
                })?
            }
            other => return Err(format!("scenario {case}: {other:?}")),
        }
    }
    Ok("Akbulut and 50 random scenarios: block sums are the identity on both sides".to_string())
}

fn c7_trivializer() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = SearchConfig::default();
    let mut worst = 0;
    for case in 0..100 {
        let rank = rng.gen_range(1..=3);
        let mut p = Presentation::trivial(rank);
        for _ in 0..rng.gen_range(1..=8) {
            let t = rng.gen_range(0..rank);
            let mv = match rng.gen_range(0..4) {
                0 | 1 if rank > 1 => {
                    let over = (t + rng.gen_range(1..rank)) % rank;
                    Move::slide(
                        t,
                        over,
                        random_word(&mut rng, rank, 1),
                        if rng.gen_bool(0.5) { 1 } else { -1 },
                    )
                }
                2 => Move::Conjugate {
                    target: t,
                    by: random_word(&mut rng, rank, 1),
                },
                _ => Move::Invert { target: t },
            };
            p.apply(mv).unwrap();
        }
        let q = p.rebased();
        match trivialize_search(&q, &cfg) {
            cork_core::grouppres::TriState::Yes { evidence } => {
                evidence
                    .verify(&q)
                    .map_err(|e| format!("case {case}: replay failed: {e}"))?;
                worst = worst.max(evidence.generated);
            }
            other => return Err(format!("case {case} {q}: {}", serde_json::to_string(&other).unwrap())),
        }
    }
    for (rank, rels) in [
        (1, vec![vec![1, 1]]),
        (1, vec![vec![1, 1, 1]]),
        (2, vec![vec![1, 1], vec![2]]),
    ] {
        let refs: Vec<&[i32]> = rels.iter().map(Vec::as_slice).collect();
        let p = Presentation::from_signed(rank, &refs).unwrap();
        match trivialize_search(&p, &cfg) {
            cork_core::grouppres::TriState::No { witness } => {
                ensure(witness.verify(&p) && AbelianWitness::find(&p) == Some(witness), || {
                    format!("{p}: witness")
                })?
            }
            other => return Err(format!("{p}: {}", serde_json::to_string(&other).unwrap())),
        }
    }
    Ok(format!(
        "100/100 yes and replayed (max {worst} states); x^2-type inputs no with witness"
    ))
}

fn c8_end_to_end() -> Outcome {
    for name in ["minimal.json", "akbulut.json", "commutator.json"] {
        let sc = scenario(name);
        let cert = extract(&sc, Budgets::default()).map_err(|e| format!("{name}: {e}"))?;
        let v = &cert.verdicts;
        let required = [
            v.theorem1.status(),
            v.theorem2.status(),
            v.b.status(),
            v.c.status(),
            v.d.status(),
        ];
        ensure(required.iter().all(|s| *s == Status::Yes), || {
            format!("{name}: {:?}", v.statuses())
        })?;
        if name == "commutator.json" {
            ensure(v.a.status() == Status::Yes, || format!("{name}: A = {}", v.a.status()))?;
            ensure(!cert.stage5.as_ref().unwrap().witness_moves.is_empty(), || {
                "no witness moves".to_string()
            })?;
        }
        let report = verify_certificate(&sc, &cert).map_err(|e| format!("{name}: {e}"))?;
        ensure(report.exit_code() == 0, || {
            format!("{name}: verify status {}", report.exit_code())
        })?;
    }
    Ok("minimal, akbulut, commutator: required verdicts yes; verify status 0".to_string())
}

fn c9_determinism() -> Outcome {
    let mut names: Vec<String> = std::fs::read_dir(fixtures())
        .unwrap()
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter(|n| n.ends_with(".json") && !n.ends_with("-diagram.json"))
        .collect();
    names.sort();
    for name in &names {
        let sc = scenario(name);
        let a = extract(&sc, Budgets::default()).map_err(|e| e.to_string())?.to_json();
        let b = extract(&sc, Budgets::default()).map_err(|e| e.to_string())?.to_json();
        ensure(a == b, || format!("{name}: certificates differ"))?;
    }
    Ok(format!("{} fixtures byte-identical", names.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "akbulut cork homology", Duration::from_secs(1), c1_akbulut_homology),
        (
            2,
            "handle trade involution",
            Duration::from_secs(5),
            c2_trade_involution,
        ),
        (3, "akbulut symmetry", Duration::from_secs(1), c3_symmetry),
        (4, "unimodular reduction", Duration::from_secs(30), c4_unimodular),
        (
            5,
            "slide formula invariants",
            Duration::from_secs(30),
            c5_slide_invariants,
        ),
        (
            6,
            "sequential killing block sums",
            Duration::from_secs(10),
            c6_addendum_c,
        ),
        (7, "trivializer soundness", Duration::from_secs(60), c7_trivializer),
        (8, "end-to-end theorem run", Duration::from_secs(120), c8_end_to_end),
        (9, "determinism", Duration::from_secs(120), c9_determinism),
    ];
    let mut failed = 0;
    for (id, name, limit, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(m) if took > limit => Err(format!("{m}; took {took:.2?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(m) => println!("criterion {id} PASS {name} ({took:.2?}): {m}"),
            Err(m) => {
                failed += 1;
                println!("criterion {id} FAIL {name} ({took:.2?}): {m}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
