//! Text entry points never panic, and accepted inputs satisfy their contracts.
//! Also replays the fuzz corpus seeds.

use std::path::Path;

use inar::data::{parse_counts, parse_t_grid};
use inar::estimate::Lags;
use inar::{classify, SpecDocument};
use proptest::prelude::*;

fn exercise_counts(text: &str) {
    if let Ok(series) = parse_counts(text, "prop") {
        assert!(!series.values.is_empty());
    }
}

fn exercise_spec(text: &str) {
    let Ok(doc) = SpecDocument::parse(text) else { return };
    if let Ok(c) = doc.coefficients() {
        let _ = classify(&c);
    }
    if let Ok(spec) = doc.into_model() {
        let _ = inar::moments::mean_exact(&spec, 8);
    }
}

fn exercise_lags(text: &str) {
    if let Ok(lags) = text.parse::<Lags>() {
        let again: Lags = lags.to_string().parse().unwrap();
        assert_eq!(lags, again);
        let _ = inar::estimate::cls_fit(&[1, 2, 3, 4, 5, 6, 7, 8], &lags);
    }
}

fn exercise_grid(text: &str) {
    if let Ok(grid) = parse_t_grid(text) {
        assert!(grid.iter().all(|t| t.is_finite() && *t >= 0.0));
        assert!(grid.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn fuzz_corpus_seeds() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus");
    let targets: [(&str, fn(&str)); 4] = [
        ("parse_counts", exercise_counts),
        ("parse_spec_json", exercise_spec),
        ("parse_lags", exercise_lags),
        ("parse_t_grid", exercise_grid),
    ];
    for (dir, run) in targets {
        let entries = std::fs::read_dir(root.join(dir)).unwrap();
        let mut seen = 0;
        for entry in entries {
            let bytes = std::fs::read(entry.unwrap().path()).unwrap();
            if let Ok(text) = std::str::from_utf8(&bytes) {
                run(text);
                seen += 1;
            }
        }
        assert!(seen > 0, "no seeds for {dir}");
    }
}

proptest! {
    #[test]
    fn counts_never_panic(text in "[0-9 #\\-\\n\\t.a-z]{0,64}") {
        exercise_counts(&text);
    }

    #[test]
    fn spec_json_never_panics(
        alphas in proptest::collection::vec(-0.5f64..1.5, 0..10),
        family in prop_oneof![Just("poisson"), Just("geometric"), Just("bernoulli"), Just("negative_binomial"), Just("empirical"), Just("bogus")],
        x in -1.0f64..3.0,
    ) {
        let list: Vec<String> = alphas.iter().map(|a| a.to_string()).collect();
        let body = match family {
            "poisson" => format!(r#"{{"family":"poisson","lambda":{x}}}"#),
            "geometric" => format!(r#"{{"family":"geometric","prob":{x}}}"#),
            "bernoulli" => format!(r#"{{"family":"bernoulli","prob":{x}}}"#),
            "negative_binomial" => format!(r#"{{"family":"negative_binomial","r":{x},"prob":0.5}}"#),
            "empirical" => format!(r#"{{"family":"empirical","pmf":{{"0":{x},"4":{}}}}}"#, 1.0 - x),
            _ => r#"{"family":"bogus"}"#.to_string(),
        };
        exercise_spec(&format!(r#"{{"alphas":[{}],"innovation":{body}}}"#, list.join(",")));
    }

    #[test]
    fn arbitrary_text_never_panics(text in "\\PC{0,40}") {
        exercise_spec(&text);
        exercise_lags(&text);
        exercise_grid(&text);
    }

    #[test]
    fn lag_lists_never_panic(text in "[0-9, ]{0,30}") {
        exercise_lags(&text);
    }

    #[test]
    fn grids_never_panic(text in "[0-9e.,+\\- ]{0,30}") {
        exercise_grid(&text);
    }
}
