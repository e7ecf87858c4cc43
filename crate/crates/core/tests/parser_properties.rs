// SPDX-License-Identifier: Apache-2.0

mod support;

use rtlcast::verilog::{check_syntax, forests_isomorphic, parse, pretty_print};

use support::{corpus, mutation_scan};

#[test]
fn corpus_is_large_enough() {
    assert!(corpus().len() >= 20);
}

#[test]
fn every_corpus_file_parses() {
    for (name, src) in corpus() {
        if let Err(r) = parse(&src) {
            panic!("{} failed to parse:\n{}", name, r.render(&name));
        }
    }
}

#[test]
fn round_trip_is_isomorphic() {
    for (name, src) in corpus() {
        let a = parse(&src).unwrap();
        let text = pretty_print(&a).unwrap();
        let b = parse(&text).unwrap_or_else(|r| panic!("{}: printed text does not parse\n{}\n{}", name, r.render(&name), text));
        assert!(forests_isomorphic(&a, &b), "{}: round trip changed the tree", name);
        assert_eq!(pretty_print(&b).unwrap(), text, "{}: printer is not a fixpoint", name);
    }
}

#[test]
fn parsing_is_deterministic() {
    for (_, src) in corpus() {
        let a = parse(&src).unwrap();
        let b = parse(&src).unwrap();
        assert!(forests_isomorphic(&a, &b));
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

#[test]
fn single_token_deletion_is_flagged() {
    let scan = mutation_scan(&corpus());
    let rate = scan.rate();
    println!("mutants: {}, flagged: {}, rate: {:.4}", scan.total, scan.flagged, rate);
    for m in scan.missed.iter().take(std::env::var("MUT_SHOW").ok().and_then(|v| v.parse().ok()).unwrap_or(40)) {
        println!("  missed {}", m);
    }
    assert!(rate >= 0.95, "mutation detection rate {:.4} below 0.95", rate);
}

#[test]
fn removing_endmodule_reports_unterminated_at_final_line() {
    for (name, src) in corpus() {
        let Some(pos) = src.rfind("endmodule") else { continue };
        let mutant = format!("{}{}", &src[..pos], &src[pos + "endmodule".len()..]);
        let report = check_syntax(&mutant);
        assert!(!report.ok(), "{}", name);
        let last = report.diagnostics.last().unwrap();
        assert_eq!(last.kind, rtlcast::verilog::DiagnosticKind::UnterminatedConstruct, "{}", name);
        let final_line = mutant.trim_end().lines().count() as u32;
        assert!(last.span.line.abs_diff(final_line) <= 1, "{}: line {} vs {}", name, last.span.line, final_line);
    }
}

#[test]
fn diagnostics_are_sorted() {
    for (_, src) in corpus() {
        let broken = src.replace(';', "");
        let r = check_syntax(&broken);
        let pos: Vec<_> = r.diagnostics.iter().map(|d| (d.span.line, d.span.column)).collect();
        let mut sorted = pos.clone();
        sorted.sort();
        assert_eq!(pos, sorted);
        for d in &r.diagnostics {
            assert_eq!(d.offending_line_text, broken.split('\n').nth(d.span.line as usize - 1).unwrap().trim_end_matches('\r'));
        }
    }
}
