//! Integration coverage for the spider engine: rule scalars, confluence of
//! the terminating subset, zero propagation, compile errors.

use num_complex::Complex64 as C64;
use quon_core::numerics::{Tensor, Tolerance};
use quon_core::qudit_core::{GateName, SpiderColor};
use quon_core::spider_engine::{
    apply_rule, compile_to_quon, compose_diagrams, eval_tensor, gate_diagram, juxtapose_diagrams,
    normalize, rule_suite, spider_diagram, wire_diagram, NodeKind, RewriteRule, Site, SpiderError,
};
use quon_core::suite::canonical_instances;
use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn color_change_records_duality_scalar() {
    for d in 2..=5usize {
        let w = spider_diagram(d, SpiderColor::White, 1, 2);
        let s = w
            .node_ids()
            .find(|&i| matches!(w.node(i), Some(NodeKind::WSpider { .. })))
            .unwrap();
        let after = apply_rule(&w, RewriteRule::ColorChange, &Site::nodes(vec![s])).unwrap();
        // n = 3 boundary points: scalar d^{1/2}
        let expect = (d as f64).sqrt();
        assert!((after.scalar - C64::new(expect, 0.0)).norm() < 1e-12);
        assert!(eval_tensor(&w)
            .unwrap()
            .approx_eq(&eval_tensor(&after).unwrap(), Tolerance::default()));
    }
}

#[test]
fn rule_suite_all_pass_and_sorted() {
    let reports = rule_suite(&[2, 3, 4, 5]);
    assert!(!reports.is_empty());
    for rep in &reports {
        assert!(rep.pass, "{} d={} deviation={}", rep.rule, rep.d, rep.deviation);
    }
    let keys: Vec<(String, usize)> = reports.iter().map(|r| (r.rule.clone(), r.d)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn normalize_is_confluent_on_random_stacks() {
    // applying the terminating rules in a randomized order reaches the same
    // node-count normal form with the same semantics
    let d = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for round in 0..10 {
        let copy = spider_diagram(d, SpiderColor::Black, 1, 2);
        let merge = spider_diagram(d, SpiderColor::Black, 2, 1);
        let chain = compose_diagrams(
            &merge,
            &compose_diagrams(
                &juxtapose_diagrams(&spider_diagram(d, SpiderColor::Black, 1, 1), &wire_diagram(d))
                    .unwrap(),
            &copy,
            )
            .unwrap(),
        )
        .unwrap();
        let reference = normalize(&chain);
        let mut g = chain.clone();
        loop {
            // collect every applicable terminating rewrite
            let ids: Vec<usize> = g.node_ids().collect();
            let mut moves: Vec<(RewriteRule, Site)> = Vec::new();
            for &a in &ids {
                if apply_rule(&g, RewriteRule::UnitCancel, &Site::nodes(vec![a])).is_ok() {
                    moves.push((RewriteRule::UnitCancel, Site::nodes(vec![a])));
                }
                for &b in &ids {
                    if a == b {
                        continue;
                    }
                    for rule in [RewriteRule::FuseBlack, RewriteRule::FuseWhite] {
                        if apply_rule(&g, rule, &Site::nodes(vec![a, b])).is_ok() {
                            moves.push((rule, Site::nodes(vec![a, b])));
                        }
                    }
                }
            }
            if g.genus_marks > 0 {
                moves.push((RewriteRule::GenusCancel, Site::empty()));
            }
            if moves.is_empty() {
                break;
            }
            let (rule, site) = moves.choose(&mut rng).unwrap().clone();
            g = apply_rule(&g, rule, &site).unwrap();
        }
        assert_eq!(g.live_nodes(), reference.live_nodes(), "round {round}");
        assert!(eval_tensor(&g)
            .unwrap()
            .approx_eq(&eval_tensor(&reference).unwrap(), Tolerance::default()));
    }
}

#[test]
fn normalize_shrinks_within_node_count_steps() {
    let d = 2;
    for (_, _, pattern, _) in canonical_instances(d) {
        let before = pattern.live_nodes();
        let after = normalize(&pattern).live_nodes();
        assert!(after <= before);
    }
}

#[test]
fn zero_diagram_propagates() {
    let d = 3;
    let mut g = gate_diagram(d, GateName::Z);
    g.zero = true;
    let t = eval_tensor(&g).unwrap();
    assert!(t.norm() < 1e-15);
    assert!(t.approx_eq(&Tensor::zeros(d, 1, 1), Tolerance::default()));
}

#[test]
fn named_boxes_do_not_compile() {
    let d = 2;
    let g = gate_diagram(d, GateName::Z);
    assert_eq!(compile_to_quon(&g).unwrap_err(), SpiderError::NotCompilable);
    // G is a named box as well
    let g2 = gate_diagram(d, GateName::G);
    assert_eq!(compile_to_quon(&g2).unwrap_err(), SpiderError::NotCompilable);
}

#[test]
fn no_match_reports() {
    let d = 2;
    let w = spider_diagram(d, SpiderColor::White, 1, 2);
    let s = w
        .node_ids()
        .find(|&i| matches!(w.node(i), Some(NodeKind::WSpider { .. })))
        .unwrap();
    assert_eq!(
        apply_rule(&w, RewriteRule::FuseBlack, &Site::nodes(vec![s, s])).unwrap_err(),
        SpiderError::NoMatch
    );
    assert_eq!(
        apply_rule(&w, RewriteRule::GenusCancel, &Site::empty()).unwrap_err(),
        SpiderError::NoMatch
    );
}

#[test]
fn fbox_wire_compiles_to_fourier() {
    use quon_core::qudit_core::gate;
    use quon_core::quon_calculus::eval_network;
    use quon_core::spider_engine::fbox_diagram;
    for d in 2..=4usize {
        for p in 1..=3u8 {
            let diag = fbox_diagram(d, p);
            let net = compile_to_quon(&diag).unwrap();
            let v = eval_network(&net).unwrap();
            let mut expect = Tensor::identity(d, 1);
            for _ in 0..p {
                expect =
                    quon_core::numerics::tensor_compose(&expect, &gate(d, GateName::F)).unwrap();
            }
            assert!(v.approx_eq(&expect, Tolerance::default()), "d={d} p={p}");
        }
    }
}

#[test]
fn random_soundness_spot_check() {
    // a handful of randomized-context soundness draws per rule at d=2
    let d = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for (name, rule, pattern, site) in canonical_instances(d) {
        for _ in 0..5 {
            let (embedded, offset) = quon_core::suite::embed_in_random_context(&pattern, &mut rng);
            let shifted = Site::nodes(site.nodes.iter().map(|&n| n + offset).collect());
            let before = eval_tensor(&embedded).unwrap();
            let rewritten = apply_rule(&embedded, rule, &shifted).unwrap();
            let after = eval_tensor(&rewritten).unwrap();
            assert!(
                before.approx_eq(&after, Tolerance::default()),
                "rule {name} broke semantics"
            );
        }
    }
    let _: u8 = rng.gen();
}
