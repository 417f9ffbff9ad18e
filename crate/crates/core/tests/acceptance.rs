//! Acceptance suite: ten end-to-end criteria, all at exact rational
//! tolerance.  Runs without the libtest harness so that every criterion
//! prints exactly one `PASS` / `FAIL` line; the process fails if any
//! criterion does.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use serde_json::{json, Value};

use common::{normalize, path_class, path_matrix, world_class};
use probcirc::axioms::{check_all, check_derivation, instantiate, Derivation, LemmaId, Params, Rule};
use probcirc::circuit::gates::{failure_circuit, id_n};
use probcirc::circuit::{flatten, serialize, Circuit};
use probcirc::normalform::{
    bayes_inverse, disintegrate, disintegrate_at, eliminate_conditioning, equiv, from_matrix, joint_of,
    normal_form, recompose,
};
use probcirc::random::{CircuitConfig, Gen};
use probcirc::rat::{complement, rat};
use probcirc::semantics::{circuits_prop_equal, class_of, eval, ProjClass, SubStochMatrix};
use probcirc::surface::{infer, parse_program, translate, Program};
use probcirc::Rat;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn program(text: &str) -> Program {
    parse_program(text).unwrap_or_else(|e| panic!("bad test program: {e}\n{text}"))
}

fn shipped(dir: &str, name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(dir).join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Weight of output `1` in a canonical `0 -> 1` class.
fn weight_of_one(class: &ProjClass) -> Option<Rat> {
    match class {
        ProjClass::Canonical(m) if m.inputs() == 0 && m.outputs() == 1 => Some(m.entry(1, 0).clone()),
        _ => None,
    }
}

// ---------------------------------------------------------------------------

fn soundness_suite() -> Outcome {
    let reports = check_all(100, 2024);
    let axioms = reports.iter().filter(|r| matches!(r.rule, Rule::Axiom(_))).count();
    ensure(axioms == 39, || format!("expected 39 axioms, found {axioms}"))?;
    for r in &reports {
        ensure(r.trials == 100 && r.ok(), || {
            format!("{} failed {} of {} trials: {:?}", r.rule, r.failures.len(), r.trials, r.failures.first())
        })?;
    }
    Ok(format!("{} axioms and {} lemmas sound on 100 draws each", axioms, reports.len() - axioms))
}

fn urn_puzzle() -> Outcome {
    let prog = program(&shipped("programs", "urn.prog"));
    let oracle = world_class(&prog, 1);
    let got = infer(&prog).map_err(|e| e.to_string())?;
    ensure(weight_of_one(&oracle) == Some(rat(2, 3)), || format!("oracle gives {oracle:?}"))?;
    ensure(got == oracle, || format!("infer gives {got:?}"))?;
    Ok("P(firstball) = 2/3".into())
}

fn von_neumann_text(p: &str) -> String {
    format!(
        "let first = flip {p} in let second = flip {p} in \
         let compare = first xor second in let _ = observe compare in first"
    )
}

fn von_neumann() -> Outcome {
    let fair = Circuit::flip(rat(1, 2)).unwrap();
    for p in ["1/10", "1/3", "1/2", "9/10"] {
        let prog = program(&von_neumann_text(p));
        let c = translate(&prog).map_err(|e| e.to_string())?;
        ensure(equiv(&c, &fair).map_err(|e| e.to_string())?, || format!("p = {p}: not equivalent to flip 1/2"))?;
        let oracle = world_class(&prog, 1);
        ensure(weight_of_one(&oracle) == Some(rat(1, 2)), || format!("p = {p}: oracle gives {oracle:?}"))?;
    }
    for p in ["0", "1"] {
        let prog = program(&von_neumann_text(p));
        let class = infer(&prog).map_err(|e| e.to_string())?;
        ensure(class.is_bottom(), || format!("p = {p}: expected bottom, got {class:?}"))?;
        ensure(world_class(&prog, 1).is_bottom(), || format!("p = {p}: oracle is not bottom"))?;
    }
    Ok("fair for p in {1/10, 1/3, 1/2, 9/10}; bottom for p in {0, 1}".into())
}

fn free_variable_example() -> Outcome {
    let prog = program(&shipped("programs", "frobenius.prog"));
    let c = translate(&prog).map_err(|e| e.to_string())?;
    ensure(circuits_prop_equal(&c, &Circuit::id()).map_err(|e| e.to_string())?, || {
        "translation is not proportional to the identity".into()
    })?;
    let oracle = world_class(&prog, 1);
    let identity = normalize(SubStochMatrix::identity(1));
    ensure(oracle == identity, || format!("oracle gives {oracle:?}"))?;
    Ok("open program is proportional to id".into())
}

fn normalization_contexts() -> Outcome {
    let f_ctx = program(&shipped("programs", "context_f.prog"));
    let g_ctx = program(&shipped("programs", "context_g.prog"));
    let (cf, cg) = (infer(&f_ctx).map_err(|e| e.to_string())?, infer(&g_ctx).map_err(|e| e.to_string())?);
    ensure(weight_of_one(&cf) == Some(rat(2, 11)), || format!("f-context gives {cf:?}"))?;
    ensure(weight_of_one(&cg) == Some(rat(1, 10)), || format!("g-context gives {cg:?}"))?;
    ensure(world_class(&f_ctx, 1) == cf && world_class(&g_ctx, 1) == cg, || "oracle disagrees".into())?;
    let f = translate(&program("input x : B; let y = x or flip 1/2 in let z = observe y in y"))
        .map_err(|e| e.to_string())?;
    let g = translate(&program("input x : B; true")).map_err(|e| e.to_string())?;
    ensure(!equiv(&f, &g).map_err(|e| e.to_string())?, || "f and g reported equivalent".into())?;
    let contexts = (translate(&f_ctx).unwrap(), translate(&g_ctx).unwrap());
    ensure(!equiv(&contexts.0, &contexts.1).unwrap(), || "contexts reported equivalent".into())?;
    Ok("f-context 2/11, g-context 1/10, f and g inequivalent".into())
}

fn causal_config() -> CircuitConfig {
    CircuitConfig {
        max_width: 4,
        max_gens: 15,
        cond: false,
        flips: true,
    }
}

fn normal_forms() -> Outcome {
    let mut g = Gen::new(6);
    let cfg = causal_config();
    for i in 0..500 {
        let c = g.any_circuit(&cfg);
        let nf = normal_form(&c).map_err(|e| format!("circuit {i}: {e}"))?;
        let want = path_matrix(&c);
        ensure(eval(&nf).unwrap() == want, || format!("circuit {i}: {} changes semantics", serialize(&c)))?;
    }
    for i in 0..200 {
        let c = g.any_circuit(&cfg);
        let d = g.engineered_equal(&c);
        ensure(path_matrix(&c) == path_matrix(&d), || format!("engineered pair {i} is not equal"))?;
        let (nc, nd) = (normal_form(&c).unwrap(), normal_form(&d).unwrap());
        ensure(nc == nd, || format!("engineered pair {i}: normal forms differ for {}", serialize(&c)))?;
    }
    let (mut found, mut tries) = (0, 0);
    while found < 200 {
        tries += 1;
        ensure(tries < 5000, || format!("only {found} inequivalent perturbations in {tries} draws"))?;
        let c = g.any_circuit(&cfg);
        let d = g.perturbed(&c);
        if !d.is_causal() || path_matrix(&c) == path_matrix(&d) {
            continue;
        }
        found += 1;
        let (nc, nd) = (normal_form(&c).unwrap(), normal_form(&d).unwrap());
        ensure(nc != nd, || format!("perturbed pair: equal normal forms for {}", serialize(&c)))?;
    }
    Ok(format!("500 sound, 200 engineered identical, 200 perturbed distinct ({tries} draws)"))
}

fn oracle_agreement() -> Outcome {
    let mut g = Gen::new(7);
    let mut with_cond = 0;
    for i in 0..1000 {
        let cfg = CircuitConfig {
            cond: i % 2 == 1,
            ..causal_config()
        };
        let c = g.any_circuit(&cfg);
        with_cond += usize::from(!c.is_causal());
        let m = eval(&c).map_err(|e| format!("circuit {i}: {e}"))?;
        ensure(m == path_matrix(&c), || format!("circuit {i} disagrees: {}", serialize(&c)))?;
    }
    Ok(format!("1000 circuits agree exactly ({with_cond} with conditioning)"))
}

fn disintegration_and_bayes() -> Outcome {
    let mut g = Gen::new(8);
    for i in 0..200 {
        let n = g.range(1, 4);
        let joint = g.joint(n);
        let (marginal, conditional) = disintegrate(&joint).unwrap();
        ensure(recompose(&marginal, &conditional).unwrap() == joint, || format!("joint {i}: single-wire split"))?;
        for a in 1..=n {
            let (m, c) = disintegrate_at(&joint, a).unwrap();
            ensure(recompose(&m, &c).unwrap() == joint, || format!("joint {i}: split at {a}"))?;
        }
        ensure(eval(&from_matrix(&joint).unwrap()).unwrap() == joint, || format!("joint {i}: normal form"))?;
    }
    let not_matrix = eval(&Circuit::not()).unwrap();
    for i in 0..50 {
        let prior = from_matrix(&g.full_support_joint(1)).unwrap();
        ensure(bayes_inverse(&Circuit::not(), &prior).unwrap() == not_matrix, || format!("prior {i}: Bayes of not"))?;
    }
    for i in 0..100 {
        let (m, n) = (g.range(1, 2), g.range(1, 2));
        let prior = from_matrix(&g.joint(m)).unwrap();
        let f = g.circuit(m, &CircuitConfig { max_width: 3, max_gens: 8, ..causal_config() });
        let f = if f.outputs() == n { f } else { from_matrix(&g.stochastic(m, f.outputs().max(1))).unwrap() };
        let n = f.outputs();
        // Left: prior ; copy ; (id ⊗ f) over (x, y), built two ways.
        let joint = joint_of(&f, &prior).unwrap();
        let left = eval(
            &Circuit::seq_all(vec![
                prior.clone(),
                probcirc::circuit::gates::copy_bundle(m),
                Circuit::par(id_n(m), f.clone()),
            ])
            .unwrap(),
        )
        .unwrap();
        ensure(joint == left, || format!("pair {i}: joint construction"))?;
        // Right: (prior ; f) ; copy ; (bayes ⊗ id), reordered to (x, y).
        let output = eval(&Circuit::seq(prior.clone(), f.clone()).unwrap()).unwrap();
        let inverse = bayes_inverse(&f, &prior).unwrap();
        let right = SubStochMatrix::from_fn(0, m + n, |row, _| {
            let (x, y) = (row >> n, row & ((1 << n) - 1));
            output.entry(y, 0) * inverse.entry(x, y)
        })
        .unwrap();
        ensure(left == right, || format!("pair {i}: the two disintegrations differ"))?;
    }
    Ok("200 joints recompose; Bayes of not is not; 100 two-order identities".into())
}

fn conditioning_elimination() -> Outcome {
    let mut g = Gen::new(9);
    let cfg = CircuitConfig {
        cond: true,
        ..causal_config()
    };
    let (mut done, mut bottoms, mut tries) = (0, 0, 0);
    while done < 200 {
        tries += 1;
        ensure(tries < 10_000, || "too few circuits with conditioning".into())?;
        let c = if tries % 5 == 0 { g.failing_circuit(0, &cfg) } else { g.circuit(0, &cfg) };
        if c.is_causal() {
            continue;
        }
        done += 1;
        let out = eliminate_conditioning(&c).map_err(|e| format!("{}: {e}", serialize(&c)))?;
        let failure = flatten(&failure_circuit(0, c.outputs()));
        let class = path_class(&c);
        if class.is_bottom() {
            bottoms += 1;
            ensure(flatten(&out) == failure, || format!("{}: not the failure circuit", serialize(&c)))?;
        } else {
            ensure(out.is_causal(), || format!("{}: result still conditions", serialize(&c)))?;
            ensure(flatten(&out) != failure, || format!("{}: spurious failure circuit", serialize(&c)))?;
            // Oracle on the input, evaluator on the (large) normal form.
            ensure(class_of(&out).unwrap() == class, || format!("{}: class changed", serialize(&c)))?;
        }
    }
    for i in 0..50 {
        let (p, q) = (g.prob_open(), g.prob_open());
        let pq = &p * &q;
        let r = &pq / (&pq + complement(&p) * complement(&q));
        let mut params = Params::new();
        params.insert("p".into(), p);
        params.insert("q".into(), q);
        let inst = instantiate(LemmaId::Mult, &params).map_err(|e| format!("draw {i}: {e}"))?;
        ensure(inst.params["r"] == r, || format!("draw {i}: r = {}", inst.params["r"]))?;
        ensure(path_class(&inst.lhs) == path_class(&Circuit::flip(r.clone()).unwrap()), || {
            format!("draw {i}: (flip p ⊗ flip q) ; cond is not flip r")
        })?;
    }
    Ok(format!("200 circuits ({bottoms} failing) eliminated; 50 Mult draws exact"))
}

/// Every step's rejection index when that step alone is corrupted.
fn mutations(text: &str) -> Result<usize, String> {
    let original: Value = serde_json::from_str(text).unwrap();
    let steps = original["steps"].as_array().unwrap().len();
    let mut checked = 0;
    for i in 0..steps {
        let mut variants = Vec::new();
        // A path into a generator's (nonexistent) children.
        let mut deep = original.clone();
        let path = deep["steps"][i]["path"].as_array_mut().unwrap();
        path.extend(std::iter::repeat(json!(0)).take(40));
        variants.push(("path", deep));
        // Every probability parameter nudged.
        if let Some(params) = original["steps"][i]["params"].as_object() {
            for (k, v) in params {
                if v.is_array() || v.is_string() {
                    let mut bad = original.clone();
                    let r = probcirc::rat::rat_from_json(v).unwrap();
                    let nudged = if r < rat(1, 2) { r + rat(1, 7) } else { r - rat(1, 7) };
                    bad["steps"][i]["params"][k] = probcirc::rat::rat_json(&nudged);
                    variants.push(("params", bad));
                }
            }
        }
        for (kind, v) in variants {
            let d = Derivation::from_json(&v.to_string()).map_err(|e| e.to_string())?;
            match check_derivation(&d) {
                Err(e) if e.step == Some(i) => checked += 1,
                Err(e) => return Err(format!("wrong {kind} at step {i} reported as {e}")),
                Ok(_) => return Err(format!("wrong {kind} at step {i} accepted")),
            }
        }
    }
    Ok(checked)
}

fn derivations() -> Outcome {
    let mut mutants = 0;
    for name in ["vonneumann.json", "derived_e5.json"] {
        let text = shipped("derivations", name);
        let d = Derivation::from_json(&text).map_err(|e| format!("{name}: {e}"))?;
        let report = check_derivation(&d).map_err(|e| format!("{name}: {e}"))?;
        ensure(report.ok(), || format!("{name}: does not reach its end term"))?;
        ensure(path_class(&d.start) == path_class(&d.end), || format!("{name}: endpoints differ"))?;
        mutants += mutations(&text).map_err(|e| format!("{name}: {e}"))?;
    }
    // The shipped endpoints are the intended ones.
    let vn = Derivation::from_json(&shipped("derivations", "vonneumann.json")).unwrap();
    ensure(vn.end == Circuit::flip(rat(1, 2)).unwrap(), || "Von Neumann derivation ends elsewhere".into())?;
    let mut params = Params::new();
    for (k, v) in [("r", rat(1, 2)), ("p", rat(1, 4)), ("q", rat(3, 4))] {
        params.insert(k.into(), v);
    }
    let e5 = instantiate(LemmaId::DerivedE5, &params).unwrap();
    let shipped_e5 = Derivation::from_json(&shipped("derivations", "derived_e5.json")).unwrap();
    ensure(flatten(&shipped_e5.start) == flatten(&e5.lhs) && flatten(&shipped_e5.end) == flatten(&e5.rhs), || {
        "derived-E5 derivation proves a different equation".into()
    })?;
    Ok(format!("both derivations replay; {mutants} mutants rejected at the mutated step"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("axiom soundness suite", soundness_suite),
        ("urn puzzle", urn_puzzle),
        ("Von Neumann trick", von_neumann),
        ("free-variable equivalence", free_variable_example),
        ("auto-normalization counterexample", normalization_contexts),
        ("normal-form soundness and uniqueness", normal_forms),
        ("evaluator vs path-enumeration oracle", oracle_agreement),
        ("disintegration and Bayes", disintegration_and_bayes),
        ("conditioning elimination", conditioning_elimination),
        ("derivation checker", derivations),
    ];
    let results: Vec<(usize, &str, Outcome, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .enumerate()
            .map(|(i, &(name, f))| {
                s.spawn(move || {
                    let start = Instant::now();
                    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
                        let msg = e
                            .downcast_ref::<String>()
                            .cloned()
                            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                            .unwrap_or_default();
                        Err(format!("panicked: {msg}"))
                    });
                    (i + 1, name, outcome, start.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = 0;
    for (n, name, outcome, secs) in &results {
        match outcome {
            Ok(detail) => println!("PASS criterion {n} ({name}): {detail} [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {n} ({name}): {why} [{secs:.1}s]");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
