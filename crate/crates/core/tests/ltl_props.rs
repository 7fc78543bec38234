mod common;

use common::gen::{random_formula, random_lasso};
use common::unroll::{root_values, Unrolled};
use cx_core::ltl::{annotate_tree, evaluate, explain_formula, Color, LtlEvalError};
use cx_core::{parse_ltl, Trace, Value, ValueKind};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn decl() -> Vec<(String, ValueKind)> {
    vec![
        ("p".into(), ValueKind::Bool),
        ("q".into(), ValueKind::Bool),
        ("r".into(), ValueKind::Bool),
        ("x".into(), ValueKind::int(0, 3)),
    ]
}

fn sample(seed: u64) -> (String, Trace) {
    let mut rng = StdRng::seed_from_u64(seed);
    let text = random_formula(&mut rng, 4, &["p", "q", "r"], Some("x"));
    let t = random_lasso(&mut rng, &["p", "q", "r"], Some("x"), 5);
    (text, t)
}

fn roots(text: &str, t: &Trace) -> Vec<Value> {
    let f = parse_ltl(text, &decl()).unwrap();
    let table = evaluate(&f, t).unwrap();
    (1..=t.len()).map(|p| table.value(f.root(), p)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn agrees_with_unrolling(seed in any::<u64>()) {
        let (text, t) = sample(seed);
        let f = parse_ltl(&text, &decl()).unwrap();
        let table = evaluate(&f, &t).unwrap();
        let mut oracle = Unrolled::new(&f, &t);
        for n in 0..f.len() {
            for p in 1..=t.len() {
                prop_assert_eq!(table.value(n, p), oracle.eval(n, p), "{} at {}", f.text(n), p);
            }
        }
    }

    #[test]
    fn expansion_laws(seed in any::<u64>()) {
        let (phi, t) = sample(seed);
        let (psi, _) = sample(seed.wrapping_add(1));
        prop_assert_eq!(roots(&format!("G ({phi})"), &t), roots(&format!("({phi}) & X G ({phi})"), &t));
        prop_assert_eq!(roots(&format!("F ({phi})"), &t), roots(&format!("({phi}) | X F ({phi})"), &t));
        prop_assert_eq!(
            roots(&format!("({phi}) U ({psi})"), &t),
            roots(&format!("({psi}) | (({phi}) & X (({phi}) U ({psi})))"), &t)
        );
    }

    #[test]
    fn printing_roundtrips(seed in any::<u64>()) {
        let (text, _) = sample(seed);
        let f = parse_ltl(&text, &decl()).unwrap();
        let printed = f.to_string();
        let again = parse_ltl(&printed, &decl()).unwrap();
        prop_assert_eq!(&again, &f, "{} printed as {}", text, printed);
        prop_assert_eq!(again.to_string(), printed);
    }

    #[test]
    fn formula_causes_only_name_formula_variables(seed in any::<u64>()) {
        let (text, t) = sample(seed);
        let f = parse_ltl(&text, &decl()).unwrap();
        let table = evaluate(&f, &t).unwrap();
        let vars = f.variables_under(f.root());
        for step in 1..=t.len() {
            let c = explain_formula(&f, &t, &table, step).unwrap();
            prop_assert_eq!(c.value, table.value(f.root(), step));
            for a in &c.assignments {
                prop_assert!(vars.contains(&a.var));
                prop_assert_eq!(t.value(&a.var, a.step), Some(a.value));
            }
            let mut sorted = c.assignments.clone();
            sorted.sort();
            sorted.dedup();
            prop_assert_eq!(sorted, c.assignments);
        }
    }
}

#[test]
fn temporal_operators_need_a_loop() {
    let t = Trace::new(vec!["p".into()], vec![vec![Value::Bool(true)]], None).unwrap();
    for text in ["G p", "F p", "X p", "p U p"] {
        let f = parse_ltl(text, &decl()).unwrap();
        assert_eq!(evaluate(&f, &t), Err(LtlEvalError::NoLoopForTemporal), "{text}");
    }
    let f = parse_ltl("p & !p", &decl()).unwrap();
    assert_eq!(evaluate(&f, &t).unwrap().value(f.root(), 1), Value::Bool(false));
}

#[test]
fn loop_back_to_first_state() {
    // p holds only at step 1 and the loop returns there: G F p holds, F G p fails.
    let t = Trace::new(
        vec!["p".into()],
        vec![vec![Value::Bool(true)], vec![Value::Bool(false)]],
        Some(1),
    )
    .unwrap();
    let gf = parse_ltl("G F p", &decl()).unwrap();
    let fg = parse_ltl("F G p", &decl()).unwrap();
    assert_eq!(root_values(&gf, &t), vec![Value::Bool(true); 2]);
    assert_eq!(evaluate(&gf, &t).unwrap().row(gf.root()), &[Value::Bool(true); 2]);
    assert_eq!(evaluate(&fg, &t).unwrap().row(fg.root()), &[Value::Bool(false); 2]);
}

#[test]
fn tree_colors_follow_values() {
    let t = Trace::new(
        vec!["p".into(), "x".into()],
        vec![vec![Value::Bool(true), Value::Int(2)]],
        Some(1),
    )
    .unwrap();
    let f = parse_ltl("G (p -> x + 1 > 2)", &decl()).unwrap();
    let table = evaluate(&f, &t).unwrap();
    let nodes = annotate_tree(&f, &table, 1);
    let color = |label: &str| nodes.iter().find(|n| n.label == label).unwrap().color;
    assert_eq!(color("G"), Color::True);
    assert_eq!(color("+"), Color::Arithmetic);
    assert_eq!(color("x"), Color::Arithmetic);
    assert_eq!(color("p"), Color::True);
}
