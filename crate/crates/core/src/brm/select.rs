use super::{validate_beta, SearchTrace, TargetSpec};
use crate::error::{Error, Result};
use crate::rate::{Probe, RateCurve};

/// `|bpp_default - bpp_target| / bpp_default`.
pub fn relative_bit_distance(bpp_default: f64, bpp_target: f64) -> Result<f64> {
    if !(bpp_default > 0.0 && bpp_target > 0.0) {
        return Err(Error::Domain(format!(
            "relative bit distance needs positive rates, got default {bpp_default}, target {bpp_target}"
        )));
    }
    Ok((bpp_default - bpp_target).abs() / bpp_default)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelativeSelection {
    pub chosen: usize,
    /// One probe per model at its training multiplier.
    pub defaults: Vec<Probe>,
}

impl RelativeSelection {
    pub fn default_bpps(&self) -> Vec<f64> {
        self.defaults.iter().map(|p| p.bpp).collect()
    }
}

/// Index of the smallest relative bit distance; exact ties go to the higher
/// default rate so the chosen model is displaced downward (`delta <= 1`).
/// Models with a zero default rate are never chosen unless all are.
pub fn argmin_relative(defaults: &[f64], target: f64) -> Option<usize> {
    let key = |bpp: f64| relative_bit_distance(bpp, target).unwrap_or(f64::INFINITY);
    (0..defaults.len()).min_by(|&a, &b| {
        key(defaults[a])
            .total_cmp(&key(defaults[b]))
            .then_with(|| defaults[b].total_cmp(&defaults[a]))
    })
}

/// Evaluates every model once at `beta_train` and picks the one whose default
/// rate is relatively closest to the target. No loss is computed.
pub fn select_model_relative<C: RateCurve>(
    curves: &[C],
    target: &TargetSpec,
) -> Result<RelativeSelection> {
    if curves.is_empty() {
        return Err(Error::Config("model family is empty".into()));
    }
    let defaults = curves
        .iter()
        .map(|c| validate_beta(c, c.beta_train(), target, false))
        .collect::<Result<Vec<_>>>()?;
    let bpps: Vec<f64> = defaults.iter().map(|p| p.bpp).collect();
    let chosen = argmin_relative(&bpps, target.bpp()).expect("non-empty family");
    Ok(RelativeSelection { chosen, defaults })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CandidateOutcome {
    pub index: usize,
    pub trace: SearchTrace,
    /// Loss of the matched operating point, if the search matched and the
    /// curve can decode.
    pub loss: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaselineSelection {
    pub chosen: usize,
    pub candidates: Vec<CandidateOutcome>,
    /// Range probes `(beta_min, beta_max)` of every model.
    pub ranges: Vec<(Probe, Probe)>,
}

impl BaselineSelection {
    pub fn chosen_outcome(&self) -> &CandidateOutcome {
        self.candidates
            .iter()
            .find(|c| c.index == self.chosen)
            .expect("chosen model is a candidate")
    }
}

/// Loss-based selection over every model whose rate range covers the target.
///
/// Each model's `[beta_min, beta_max]` endpoints are validated (with the loss
/// gate open) to establish its rate range. Covering models are then searched
/// from scratch with `search`. The matched candidate with
/// the lowest loss wins; without any loss, the candidate closest to the target
/// does. If no range covers the target, the model with the relatively nearest
/// range boundary is searched alone.
pub fn select_model_baseline<C, S>(
    curves: &[C],
    target: &TargetSpec,
    search: S,
) -> Result<BaselineSelection>
where
    C: RateCurve,
    S: Fn(&C, &TargetSpec) -> Result<SearchTrace>,
{
    if curves.is_empty() {
        return Err(Error::Config("model family is empty".into()));
    }
    let ranges = curves
        .iter()
        .map(|c| {
            Ok((
                validate_beta(c, c.beta_min(), target, true)?,
                validate_beta(c, c.beta_max(), target, true)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let t = target.bpp();
    let mut covering: Vec<usize> = (0..curves.len())
        .filter(|&i| ranges[i].0.bpp <= t && t <= ranges[i].1.bpp)
        .collect();
    if covering.is_empty() {
        let gap = |i: usize| {
            let (lo, hi) = &ranges[i];
            target
                .relative_error(lo.bpp)
                .min(target.relative_error(hi.bpp))
        };
        let nearest = (0..curves.len())
            .min_by(|&a, &b| gap(a).total_cmp(&gap(b)))
            .expect("non-empty family");
        covering.push(nearest);
    }

    let mut candidates = Vec::with_capacity(covering.len());
    for &i in &covering {
        let trace = search(&curves[i], target)?;
        let loss = trace.matched().then(|| trace.best_probe().loss).flatten();
        candidates.push(CandidateOutcome {
            index: i,
            trace,
            loss,
        });
    }

    let chosen = if candidates.iter().any(|c| c.loss.is_some()) {
        candidates
            .iter()
            .filter_map(|c| c.loss.map(|l| (c.index, l)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    } else {
        candidates
            .iter()
            .min_by(|a, b| {
                let ea = target.relative_error(a.trace.best_probe().bpp);
                let eb = target.relative_error(b.trace.best_probe().bpp);
                ea.total_cmp(&eb)
            })
            .map(|c| c.index)
    }
    .expect("at least one candidate");

    Ok(BaselineSelection {
        chosen,
        candidates,
        ranges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brm::{search_binary_with, Outcome, SearchOptions};
    use crate::rate::{SyntheticLogLinearCurve, TabulatedCurve};

    /// Exact lines with slope 1 through `(beta_train, default)`, bounds a
    /// factor of 2 either side.
    fn family(defaults: &[f64]) -> Vec<SyntheticLogLinearCurve> {
        defaults
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                SyntheticLogLinearCurve::new(1.0, d.ln(), 0.5, 2.0)
                    .unwrap()
                    .with_beta_train(1.0)
                    .unwrap()
                    .with_model_id(i as u32)
            })
            .collect()
    }

    #[test]
    fn relative_bit_distance_examples() {
        assert!((relative_bit_distance(0.5, 0.4).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(relative_bit_distance(0.37, 0.37).unwrap(), 0.0);
        assert!((relative_bit_distance(0.2, 0.3).unwrap() - 0.5).abs() < 1e-15);
        assert!((relative_bit_distance(0.4, 0.3).unwrap() - 0.25).abs() < 1e-15);
        assert!(relative_bit_distance(0.0, 0.3).is_err());
        assert!(relative_bit_distance(0.3, -1.0).is_err());
    }

    #[test]
    fn relative_selection_examples() {
        let t = |b| TargetSpec::with_default_tolerance(b).unwrap();
        let five = family(&[0.06, 0.12, 0.25, 0.5, 0.9]);
        let s = select_model_relative(&five, &t(0.25)).unwrap();
        assert_eq!(s.chosen, 2);
        assert_eq!(s.defaults.len(), 5);
        assert!(s
            .defaults
            .iter()
            .all(|p| p.cost.entropy_evals == 1 && p.cost.decoder_runs == 0));

        let two = family(&[0.2, 0.4]);
        assert_eq!(select_model_relative(&two, &t(0.3)).unwrap().chosen, 1);

        // D_r = {11.5, 5.25, 2.0, 0.5, 0.1667}
        let s = select_model_relative(&five, &t(0.75)).unwrap();
        assert_eq!(s.chosen, 4);
    }

    #[test]
    fn exact_tie_prefers_higher_default() {
        // D_r(0.25, 0.375) = 0.5 and D_r(0.75, 0.375) = 0.5
        assert_eq!(argmin_relative(&[0.25, 0.75], 0.375), Some(1));
        assert_eq!(argmin_relative(&[0.75, 0.25], 0.375), Some(0));
        assert_eq!(argmin_relative(&[0.0, 0.2], 0.3), Some(1));
        assert_eq!(argmin_relative(&[], 0.3), None);
    }

    #[test]
    fn empty_family_is_a_config_error() {
        let none: Vec<SyntheticLogLinearCurve> = Vec::new();
        let t = TargetSpec::with_default_tolerance(0.3).unwrap();
        assert!(matches!(
            select_model_relative(&none, &t),
            Err(Error::Config(_))
        ));
        let search = |c: &SyntheticLogLinearCurve, t: &TargetSpec| {
            search_binary_with(c, t, &SearchOptions::binary(), None)
        };
        assert!(matches!(
            select_model_baseline(&none, &t, search),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn baseline_single_candidate() {
        // ranges [0.05, 0.2], [0.25, 1.0]
        let fam = family(&[0.1, 0.5]);
        let t = TargetSpec::with_default_tolerance(0.15).unwrap();
        let search = |c: &SyntheticLogLinearCurve, t: &TargetSpec| {
            search_binary_with(c, t, &SearchOptions::binary(), None)
        };
        let sel = select_model_baseline(&fam, &t, search).unwrap();
        assert_eq!(sel.chosen, 0);
        assert_eq!(sel.candidates.len(), 1);
        assert_eq!(sel.ranges.len(), 2);
        assert!(sel.chosen_outcome().trace.matched());
    }

    #[test]
    fn baseline_no_covering_range_uses_nearest_boundary() {
        let fam = family(&[0.1, 0.5]);
        let t = TargetSpec::with_default_tolerance(0.01).unwrap();
        let search = |c: &SyntheticLogLinearCurve, t: &TargetSpec| {
            search_binary_with(c, t, &SearchOptions::binary(), None)
        };
        let sel = select_model_baseline(&fam, &t, search).unwrap();
        assert_eq!(sel.chosen, 0);
        assert_eq!(sel.candidates.len(), 1);
        assert_eq!(sel.chosen_outcome().trace.outcome, Outcome::Infeasible);
    }

    #[test]
    fn baseline_without_loss_picks_smallest_error() {
        // both cover 0.3; the tabulated one can only reach 0.29 or 0.35
        let a = TabulatedCurve::new(vec![(0.5, 0.1), (1.0, 0.29), (1.01, 0.35), (2.0, 0.8)])
            .unwrap()
            .with_beta_train(1.0)
            .unwrap();
        let b = TabulatedCurve::new(vec![(0.5, 0.15), (2.0, 0.6)])
            .unwrap()
            .with_beta_train(1.0)
            .unwrap()
            .with_model_id(1);
        let t = TargetSpec::new(0.3, 0.0001).unwrap();
        let search = |c: &TabulatedCurve, t: &TargetSpec| {
            search_binary_with(c, t, &SearchOptions::binary(), None)
        };
        let sel = select_model_baseline(&[a, b], &t, search).unwrap();
        assert_eq!(sel.candidates.len(), 2);
        assert_eq!(sel.chosen, 1);
    }
}
