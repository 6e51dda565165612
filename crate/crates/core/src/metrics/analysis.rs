use super::MetricsError;
use crate::transition::{Action, Configuration};

/// Mean of `|S| + |D|` over every configuration of every trace.
pub fn incrementality_stats(traces: &[Vec<Configuration>]) -> Result<f64, MetricsError> {
    let (sum, count) = traces
        .iter()
        .flatten()
        .fold((0usize, 0usize), |(s, n), c| (s + c.width(), n + 1));
    if count == 0 {
        return Err(MetricsError::Empty);
    }
    Ok(sum as f64 / count as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GapStats {
    pub total: usize,
    /// Maximal runs of consecutive GAP actions.
    pub runs: usize,
    pub mean_run: f64,
    pub max_run: usize,
}

pub fn gap_stats<'a>(derivations: impl IntoIterator<Item = &'a [Action]>) -> GapStats {
    let mut s = GapStats::default();
    for d in derivations {
        let mut run = 0;
        for a in d.iter().chain(std::iter::once(&Action::Shift)) {
            if *a == Action::Gap {
                run += 1;
            } else if run > 0 {
                s.total += run;
                s.runs += 1;
                s.max_run = s.max_run.max(run);
                run = 0;
            }
        }
    }
    s.mean_run = if s.runs == 0 { 0.0 } else { s.total as f64 / s.runs as f64 };
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transition::{LabelInventory, SystemKind, TransitionSystem};
    use proptest::prelude::*;

    fn actions(s: &str) -> Vec<Action> {
        s.split_whitespace().map(|a| a.parse().unwrap()).collect()
    }

    #[test]
    fn runs() {
        let d = actions("SHIFT SHIFT SHIFT GAP GAP MERGE SHIFT GAP MERGE");
        assert_eq!(
            gap_stats([d.as_slice()]),
            GapStats {
                total: 3,
                runs: 2,
                mean_run: 1.5,
                max_run: 2
            }
        );
        assert_eq!(gap_stats([actions("SHIFT LABEL:S").as_slice()]), GapStats::default());
    }

    #[test]
    fn one_token_trace() {
        // initial (0+0), after SHIFT (1+0), after LABEL (1+0)
        let sys = TransitionSystem::new(SystemKind::MlGap, LabelInventory::permissive());
        let trace = sys.trace(1, &actions("SHIFT LABEL:S")).unwrap();
        assert_eq!(trace.len(), 3);
        assert!((incrementality_stats(&[trace]).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(incrementality_stats(&[]), Err(MetricsError::Empty));
    }

    proptest! {
        #[test]
        fn gap_totals_ignore_labels(labels in proptest::collection::vec("[A-Z]{1,3}", 3)) {
            let base = actions("SHIFT SHIFT SHIFT GAP MERGE LABEL:A MERGE LABEL:B LABEL:C");
            let mut i = 0;
            let relabelled: Vec<Action> = base.iter().map(|a| match a {
                Action::Label(_) => { i += 1; Action::Label(labels[i - 1].clone()) }
                other => other.clone(),
            }).collect();
            prop_assert_eq!(gap_stats([base.as_slice()]), gap_stats([relabelled.as_slice()]));
        }
    }
}
