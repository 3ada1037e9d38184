use std::path::PathBuf;

use phecd_core::demcd::VrfyMode;
use phecd_core::oracle::{self, TradeoffRow, MAX_ORACLE_LAMBDA};

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("golden")
}

#[test]
fn golden_tables_match_recomputation() {
    let menu = oracle::builtin_menu();
    for lambda in 1..=MAX_ORACLE_LAMBDA {
        let path = golden_dir().join(oracle::golden_file_name(lambda));
        let text = std::fs::read_to_string(&path).unwrap();
        let golden: Vec<TradeoffRow> = serde_json::from_str(&text).unwrap();
        let fresh = oracle::tradeoff_table(lambda, &menu, VrfyMode::Default).unwrap();
        assert_eq!(golden.len(), fresh.len());
        for (g, f) in golden.iter().zip(&fresh) {
            assert_eq!(g.strategy, f.strategy);
            assert_eq!(g.lambda, lambda);
            assert!((g.acceptance - f.acceptance).abs() < 1e-12, "{}", g.strategy);
            assert!((g.distance - f.distance).abs() < 1e-12, "{}", g.strategy);
        }
        assert_eq!(oracle::table_json(&fresh), text, "regenerate with `phecd oracle --regen-golden`");
    }
}

#[test]
fn regeneration_is_byte_identical() {
    let dir = std::env::temp_dir().join(format!("phecd-golden-{}", std::process::id()));
    let first = oracle::regenerate_golden(&dir, VrfyMode::Default).unwrap();
    let before: Vec<String> = first.iter().map(|p| std::fs::read_to_string(p).unwrap()).collect();
    oracle::regenerate_golden(&dir, VrfyMode::Default).unwrap();
    for (p, b) in first.iter().zip(&before) {
        assert_eq!(&std::fs::read_to_string(p).unwrap(), b);
        assert_eq!(
            b,
            &std::fs::read_to_string(golden_dir().join(p.file_name().unwrap())).unwrap()
        );
    }
    std::fs::remove_dir_all(dir).unwrap();
}
