//! Flat, serialisable view of a game run.

use std::io;

use serde::{Deserialize, Serialize};

use super::estimate::Interval;
use super::{ArmTally, GameResult};
use crate::phecd::SchemeConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub game: String,
    pub scheme: String,
    pub adversary: String,
    pub params: SchemeConfig,
    pub q_e: usize,
    pub trials: u64,
    /// `null` outside deletion games.
    pub acceptance: Option<f64>,
    pub acceptance_ci: Option<Interval>,
    /// `null` when an arm had no accepted trials.
    pub advantage: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub half_width: Option<f64>,
    pub difference: Option<f64>,
    pub arms: [ArmTally; 2],
    pub aborted: u64,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    game: &'a str,
    scheme: &'a str,
    adversary: &'a str,
    q_e: usize,
    trials: u64,
    acceptance: Option<f64>,
    advantage: Option<f64>,
    ci_low: Option<f64>,
    ci_high: Option<f64>,
    half_width: Option<f64>,
    aborted: u64,
    seed: u64,
}

impl GameRecord {
    pub fn new(
        result: &GameResult,
        scheme: &str,
        adversary: &str,
        params: SchemeConfig,
        q_e: usize,
        seed: u64,
    ) -> Self {
        let est = result.estimate;
        Self {
            game: result.game.name().into(),
            scheme: scheme.into(),
            adversary: adversary.into(),
            params,
            q_e,
            trials: result.trials,
            acceptance: result.acceptance.map(|a| a.rate),
            acceptance_ci: result.acceptance.map(|a| a.ci),
            advantage: est.map(|e| e.advantage),
            ci_low: est.map(|e| e.ci_low),
            ci_high: est.map(|e| e.ci_high),
            half_width: est.map(|e| e.half_width()),
            difference: est.map(|e| e.difference),
            arms: result.arms,
            aborted: result.aborted,
            seed,
        }
    }

    fn csv_row(&self) -> CsvRow<'_> {
        CsvRow {
            game: &self.game,
            scheme: &self.scheme,
            adversary: &self.adversary,
            q_e: self.q_e,
            trials: self.trials,
            acceptance: self.acceptance,
            advantage: self.advantage,
            ci_low: self.ci_low,
            ci_high: self.ci_high,
            half_width: self.half_width,
            aborted: self.aborted,
            seed: self.seed,
        }
    }
}

/// Writes records as CSV with a header row.
pub fn write_csv<W: io::Write>(records: &[GameRecord], out: W) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_writer(out);
    for r in records {
        writer.serialize(r.csv_row())?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::builtin::{self, Builtin};
    use crate::games::{GameConfig, GameKind};
    use crate::phecd::Scheme;

    #[test]
    fn json_and_csv_shapes() {
        let config = SchemeConfig::tiny(0.25);
        let scheme = Scheme::new(config.clone()).unwrap();
        let cfg = GameConfig::new(16, 0, 2).unwrap();
        let result = builtin::run(GameKind::Ikind, Builtin::EveKnowsX, &scheme, &cfg).unwrap();
        let record = GameRecord::new(&result, "tiny", "eve-knows-x", config, 0, 2);
        let json = serde_json::to_value(&record).unwrap();
        for key in ["game", "scheme", "adversary", "params", "trials", "acceptance", "advantage", "ci_low", "ci_high", "seed"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        assert!(json["acceptance"].is_null());
        let back: GameRecord = serde_json::from_value(json).unwrap();
        assert_eq!(back, record);

        let mut buf = Vec::new();
        write_csv(&[record], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("game,scheme,adversary,q_e,trials,acceptance"));
        assert!(lines.next().unwrap().starts_with("ikind,tiny,eve-knows-x,0,16,,"));
    }
}
