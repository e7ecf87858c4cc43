// SPDX-License-Identifier: Apache-2.0

mod support;

use std::collections::HashMap;

use rtlcast::features::{subtree_digests, subtree_match_rate, SubtreeMatchConfig};
use rtlcast::verilog::{parse, AstNode};

use support::{alpha_rename, brute_force_smr, corpus, small_fixtures, smr_configs, COMBINATIONAL, SEQUENTIAL};

#[test]
fn hashed_matches_brute_force() {
    let fx = small_fixtures();
    let cfgs = smr_configs();
    for (a_name, a) in &fx {
        for (b_name, b) in &fx {
            for cfg in &cfgs {
                let fast = subtree_match_rate(a, b, cfg);
                let slow = brute_force_smr(a, b, cfg);
                assert_eq!(fast, slow, "{} vs {} with {:?}", a_name, b_name, cfg);
            }
        }
    }
}

#[test]
fn equal_digests_mean_equal_structure() {
    for (name, src) in corpus() {
        let f = parse(&src).unwrap();
        let mut nodes = Vec::new();
        // Post-order, to line up with subtree_digests.
        fn post<'a>(n: &'a AstNode, out: &mut Vec<&'a AstNode>) {
            for c in &n.children {
                post(c, out);
            }
            out.push(n);
        }
        for r in &f {
            post(r, &mut nodes);
        }
        let digests = subtree_digests(&f);
        assert_eq!(digests.len(), nodes.len());
        let mut first: HashMap<[u8; 32], usize> = HashMap::new();
        for (i, (d, size)) in digests.iter().enumerate() {
            assert_eq!(*size, nodes[i].node_count());
            match first.get(d) {
                Some(&j) => assert!(nodes[j].structurally_eq(nodes[i]), "{}: digest collision", name),
                None => {
                    first.insert(*d, i);
                }
            }
        }
    }
}

#[test]
fn self_match_is_100() {
    for (name, src) in corpus() {
        let f = parse(&src).unwrap();
        for normalize in [true, false] {
            let cfg = SubtreeMatchConfig {
                normalize_identifiers: normalize,
                ..SubtreeMatchConfig::default()
            };
            assert_eq!(subtree_match_rate(&f, &f, &cfg), 100.0, "{}", name);
        }
    }
}

#[test]
fn invariant_under_renaming() {
    let cfg = SubtreeMatchConfig::default();
    let files = corpus();
    for (i, (name, src)) in files.iter().enumerate() {
        let a = parse(src).unwrap();
        let renamed = alpha_rename(src, i as u64);
        assert_ne!(&renamed, src);
        let b = parse(&renamed).unwrap_or_else(|r| panic!("{}: {}", name, r.render(name)));
        assert_eq!(subtree_match_rate(&a, &b, &cfg), 100.0, "{}", name);
        assert_eq!(subtree_match_rate(&b, &a, &cfg), 100.0, "{}", name);
        let other = parse(&files[(i + 1) % files.len()].1).unwrap();
        assert_eq!(subtree_match_rate(&a, &other, &cfg), subtree_match_rate(&b, &other, &cfg), "{}", name);
    }
}

#[test]
fn disjoint_structures_score_low() {
    let a = parse(COMBINATIONAL).unwrap();
    let b = parse(SEQUENTIAL).unwrap();
    let smr = subtree_match_rate(&a, &b, &SubtreeMatchConfig::default());
    assert!(smr < 10.0, "{}", smr);
    assert_eq!(smr, brute_force_smr(&a, &b, &SubtreeMatchConfig::default()));
}
