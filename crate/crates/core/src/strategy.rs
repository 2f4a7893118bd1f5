//! Link-adaptation strategies: five iterative feedback rules that walk the
//! (I_TBS, repetition) lattice against a windowed block-error-rate estimate,
//! and a table-driven rule that jumps straight to a stored minimum-resource
//! assignment.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::channel::{ChannelError, LinkParams, Snr, NR_VALUES};
use crate::lut::Lut;

/// The six adaptation strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StrategyKind {
    /// Adjust I_TBS first, repetitions when I_TBS saturates.
    ItbsNr,
    /// Adjust repetitions first, I_TBS when repetitions saturate.
    NrItbs,
    /// Adjust I_TBS only; repetitions stay pinned.
    ItbsOnly,
    /// Adjust repetitions only; I_TBS stays pinned.
    NrOnly,
    /// Adjust both axes in the same decision.
    ItbsAndNr,
    /// Jump to the stored minimum-resource assignment for the SNR estimate.
    Luts,
}

pub const ALL_STRATEGIES: [StrategyKind; 6] = [
    StrategyKind::ItbsNr,
    StrategyKind::NrItbs,
    StrategyKind::ItbsOnly,
    StrategyKind::NrOnly,
    StrategyKind::ItbsAndNr,
    StrategyKind::Luts,
];

impl StrategyKind {
    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::ItbsNr => "itbs-nr",
            StrategyKind::NrItbs => "nr-itbs",
            StrategyKind::ItbsOnly => "itbs",
            StrategyKind::NrOnly => "nr",
            StrategyKind::ItbsAndNr => "itbs+nr",
            StrategyKind::Luts => "luts",
        }
    }

    /// Whether the strategy learns from feedback instead of a stored table.
    pub fn is_iterative(self) -> bool {
        !matches!(self, StrategyKind::Luts)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL_STRATEGIES
            .iter()
            .find(|k| k.name() == s)
            .copied()
            .ok_or_else(|| {
                let names: Vec<&str> = ALL_STRATEGIES.iter().map(|k| k.name()).collect();
                format!("unknown strategy {s:?}, expected one of {}", names.join(", "))
            })
    }
}

/// Limits of the assignment lattice a strategy may move within.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub itbs_max: u8,
    pub nr_min: u32,
    pub nr_max: u32,
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            itbs_max: 3,
            nr_min: 1,
            nr_max: 128,
        }
    }
}

impl Bounds {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if !NR_VALUES.contains(&self.nr_min) {
            return Err(ChannelError::InvalidNr(self.nr_min));
        }
        if !NR_VALUES.contains(&self.nr_max) {
            return Err(ChannelError::InvalidNr(self.nr_max));
        }
        if self.nr_min > self.nr_max {
            return Err(ChannelError::OutOfRange {
                context: "nr_min above nr_max",
                value: f64::from(self.nr_min),
            });
        }
        Ok(())
    }

    /// Whether the given assignment lies inside these bounds.
    pub fn contains(&self, params: LinkParams) -> bool {
        params.itbs() <= self.itbs_max
            && params.nr() >= self.nr_min
            && params.nr() <= self.nr_max
    }
}

/// What a decision did with the assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Moved to a different assignment.
    Adjusted,
    /// Estimate sits inside the tolerance band; held.
    InRange,
    /// Not enough feedback yet; held.
    WarmUp,
    /// Error rate too high but no more robust assignment exists; held.
    TargetUnreachable,
    /// Error rate has margin but no cheaper assignment exists; held.
    FloorReached,
}

/// A strategy's answer for the next transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub params: LinkParams,
    pub verdict: Verdict,
}

/// Everything a strategy may look at when deciding.
#[derive(Debug, Clone, Copy)]
pub struct DecisionContext {
    pub current: LinkParams,
    pub bler_est: Option<f64>,
    pub snr_est: Option<Snr>,
    pub bler_t: f64,
    pub tbs: u32,
    /// Half-width of the dead band around the target.
    pub tolerance: f64,
}

/// Axis a single-axis strategy moves along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdjustAxis {
    Itbs,
    Nr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Band {
    High,
    Low,
    InBand,
}

fn band(est: f64, target: f64, tolerance: f64) -> Band {
    if est > target + tolerance {
        Band::High
    } else if est < target - tolerance {
        Band::Low
    } else {
        Band::InBand
    }
}

fn hold(ctx: &DecisionContext, verdict: Verdict) -> Decision {
    Decision {
        params: ctx.current,
        verdict,
    }
}

fn set(itbs: u8, nr: u32) -> Decision {
    Decision {
        params: LinkParams::new(itbs, nr).expect("adjustments stay on the valid lattice"),
        verdict: Verdict::Adjusted,
    }
}

/// I_TBS-first rule: on a high estimate drop I_TBS, then double repetitions;
/// on a low one raise I_TBS, then halve repetitions.
pub fn next_link_params_itbs_nr(ctx: &DecisionContext, bounds: &Bounds) -> Decision {
    let Some(est) = ctx.bler_est else {
        return hold(ctx, Verdict::WarmUp);
    };
    let (itbs, nr) = (ctx.current.itbs(), ctx.current.nr());
    match band(est, ctx.bler_t, ctx.tolerance) {
        Band::InBand => hold(ctx, Verdict::InRange),
        Band::High => {
            if itbs > 0 {
                set(itbs - 1, nr)
            } else if nr < bounds.nr_max {
                set(itbs, nr * 2)
            } else {
                hold(ctx, Verdict::TargetUnreachable)
            }
        }
        Band::Low => {
            if itbs < bounds.itbs_max {
                set(itbs + 1, nr)
            } else if nr > bounds.nr_min {
                set(itbs, nr / 2)
            } else {
                hold(ctx, Verdict::FloorReached)
            }
        }
    }
}

/// Repetition-first rule: on a high estimate double repetitions, then drop
/// I_TBS; on a low one halve repetitions, then raise I_TBS.
pub fn next_link_params_nr_itbs(ctx: &DecisionContext, bounds: &Bounds) -> Decision {
    let Some(est) = ctx.bler_est else {
        return hold(ctx, Verdict::WarmUp);
    };
    let (itbs, nr) = (ctx.current.itbs(), ctx.current.nr());
    match band(est, ctx.bler_t, ctx.tolerance) {
        Band::InBand => hold(ctx, Verdict::InRange),
        Band::High => {
            if nr < bounds.nr_max {
                set(itbs, nr * 2)
            } else if itbs > 0 {
                set(itbs - 1, nr)
            } else {
                hold(ctx, Verdict::TargetUnreachable)
            }
        }
        Band::Low => {
            if nr > bounds.nr_min {
                set(itbs, nr / 2)
            } else if itbs < bounds.itbs_max {
                set(itbs + 1, nr)
            } else {
                hold(ctx, Verdict::FloorReached)
            }
        }
    }
}

/// Single-axis rule: moves only along the chosen axis, the other stays
/// pinned at whatever the session started it at.
pub fn next_link_params_single_axis(
    ctx: &DecisionContext,
    bounds: &Bounds,
    axis: AdjustAxis,
) -> Decision {
    let Some(est) = ctx.bler_est else {
        return hold(ctx, Verdict::WarmUp);
    };
    let (itbs, nr) = (ctx.current.itbs(), ctx.current.nr());
    match (band(est, ctx.bler_t, ctx.tolerance), axis) {
        (Band::InBand, _) => hold(ctx, Verdict::InRange),
        (Band::High, AdjustAxis::Itbs) => {
            if itbs > 0 {
                set(itbs - 1, nr)
            } else {
                hold(ctx, Verdict::TargetUnreachable)
            }
        }
        (Band::Low, AdjustAxis::Itbs) => {
            if itbs < bounds.itbs_max {
                set(itbs + 1, nr)
            } else {
                hold(ctx, Verdict::FloorReached)
            }
        }
        (Band::High, AdjustAxis::Nr) => {
            if nr < bounds.nr_max {
                set(itbs, nr * 2)
            } else {
                hold(ctx, Verdict::TargetUnreachable)
            }
        }
        (Band::Low, AdjustAxis::Nr) => {
            if nr > bounds.nr_min {
                set(itbs, nr / 2)
            } else {
                hold(ctx, Verdict::FloorReached)
            }
        }
    }
}

/// Two-axis rule: moves I_TBS and repetitions together, each clamped at its
/// own limit; holds only when neither axis can move.
pub fn next_link_params_itbs_and_nr(ctx: &DecisionContext, bounds: &Bounds) -> Decision {
    let Some(est) = ctx.bler_est else {
        return hold(ctx, Verdict::WarmUp);
    };
    let (itbs, nr) = (ctx.current.itbs(), ctx.current.nr());
    match band(est, ctx.bler_t, ctx.tolerance) {
        Band::InBand => hold(ctx, Verdict::InRange),
        Band::High => {
            let new_itbs = itbs.saturating_sub(1);
            let new_nr = if nr < bounds.nr_max { nr * 2 } else { nr };
            if new_itbs == itbs && new_nr == nr {
                hold(ctx, Verdict::TargetUnreachable)
            } else {
                set(new_itbs, new_nr)
            }
        }
        Band::Low => {
            let new_itbs = if itbs < bounds.itbs_max { itbs + 1 } else { itbs };
            let new_nr = if nr > bounds.nr_min { nr / 2 } else { nr };
            if new_itbs == itbs && new_nr == nr {
                hold(ctx, Verdict::FloorReached)
            } else {
                set(new_itbs, new_nr)
            }
        }
    }
}

/// Table-driven rule: jumps to the stored minimum-resource assignment for
/// the SNR estimate; holds while no estimate or no feasible row exists.
pub fn next_link_params_luts(ctx: &DecisionContext, lut: &Lut) -> Decision {
    let Some(snr_est) = ctx.snr_est else {
        return hold(ctx, Verdict::WarmUp);
    };
    match lut.get_closest_min_ru(ctx.tbs, snr_est, ctx.bler_t) {
        Ok(key) => {
            let entry = lut.get_tuple(key).expect("key just located in the table");
            let params = entry.params().expect("stored rows hold valid assignments");
            let verdict = if params == ctx.current {
                Verdict::InRange
            } else {
                Verdict::Adjusted
            };
            Decision { params, verdict }
        }
        Err(_) => hold(ctx, Verdict::TargetUnreachable),
    }
}

/// Dispatches to the rule for `kind`. The table-driven strategy requires
/// `lut`; callers validate that before the session starts.
pub fn decide(
    kind: StrategyKind,
    ctx: &DecisionContext,
    bounds: &Bounds,
    lut: Option<&Lut>,
) -> Decision {
    match kind {
        StrategyKind::ItbsNr => next_link_params_itbs_nr(ctx, bounds),
        StrategyKind::NrItbs => next_link_params_nr_itbs(ctx, bounds),
        StrategyKind::ItbsOnly => next_link_params_single_axis(ctx, bounds, AdjustAxis::Itbs),
        StrategyKind::NrOnly => next_link_params_single_axis(ctx, bounds, AdjustAxis::Nr),
        StrategyKind::ItbsAndNr => next_link_params_itbs_and_nr(ctx, bounds),
        StrategyKind::Luts => next_link_params_luts(
            ctx,
            lut.expect("table-driven strategy needs a lookup table; callers validate first"),
        ),
    }
}

/// Where a strategy starts a session: the middle coding row, with the
/// pinned repetition count for the repetition-pinning strategy and the
/// minimum elsewhere.
pub fn initial_params(
    kind: StrategyKind,
    bounds: &Bounds,
    itbs_only_nr: u32,
) -> Result<LinkParams, ChannelError> {
    let itbs = bounds.itbs_max / 2;
    match kind {
        StrategyKind::ItbsOnly => LinkParams::new(itbs, itbs_only_nr),
        _ => LinkParams::new(itbs, bounds.nr_min),
    }
}

/// Sliding-window block-error-rate estimator over per-attempt outcomes.
#[derive(Debug, Clone)]
pub struct BlerEstimator {
    window: VecDeque<bool>,
    capacity: usize,
    min_samples: usize,
    failures: usize,
}

impl Default for BlerEstimator {
    fn default() -> Self {
        Self::new(20, 5)
    }
}

impl BlerEstimator {
    pub fn new(capacity: usize, min_samples: usize) -> Self {
        assert!(capacity >= 1, "window capacity must be at least 1");
        assert!(
            (1..=capacity).contains(&min_samples),
            "min_samples must lie in 1..=capacity"
        );
        Self {
            window: VecDeque::with_capacity(capacity),
            capacity,
            min_samples,
            failures: 0,
        }
    }

    pub fn update(&mut self, failed: bool) {
        if self.window.len() == self.capacity && self.window.pop_front() == Some(true) {
            self.failures -= 1;
        }
        self.window.push_back(failed);
        if failed {
            self.failures += 1;
        }
    }

    /// Failure fraction over the window, once enough samples arrived.
    pub fn estimate(&self) -> Option<f64> {
        (self.window.len() >= self.min_samples)
            .then(|| self.failures as f64 / self.window.len() as f64)
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lut::SAMPLE_LUT_CSV;
    use proptest::prelude::*;

    fn ctx(itbs: u8, nr: u32, est: Option<f64>) -> DecisionContext {
        DecisionContext {
            current: LinkParams::new(itbs, nr).unwrap(),
            bler_est: est,
            snr_est: None,
            bler_t: 0.05,
            tbs: 256,
            tolerance: 0.025,
        }
    }

    fn tuple(d: Decision) -> (u8, u32, Verdict) {
        (d.params.itbs(), d.params.nr(), d.verdict)
    }

    #[test]
    fn itbs_first_rule_follows_the_known_moves() {
        let b = Bounds::default();
        let high = Some(0.4);
        let low = Some(0.0);
        assert_eq!(
            tuple(next_link_params_itbs_nr(&ctx(2, 64, high), &b)),
            (1, 64, Verdict::Adjusted)
        );
        assert_eq!(
            tuple(next_link_params_itbs_nr(&ctx(0, 64, high), &b)),
            (0, 128, Verdict::Adjusted)
        );
        assert_eq!(
            tuple(next_link_params_itbs_nr(&ctx(0, 128, high), &b)),
            (0, 128, Verdict::TargetUnreachable)
        );
        assert_eq!(
            tuple(next_link_params_itbs_nr(&ctx(1, 64, low), &b)),
            (2, 64, Verdict::Adjusted)
        );
        assert_eq!(
            tuple(next_link_params_itbs_nr(&ctx(3, 64, low), &b)),
            (3, 32, Verdict::Adjusted)
        );
        assert_eq!(
            tuple(next_link_params_itbs_nr(&ctx(3, 1, low), &b)),
            (3, 1, Verdict::FloorReached)
        );
    }

    #[test]
    fn nr_first_rule_follows_the_known_moves() {
        let b = Bounds::default();
        let high = Some(0.4);
        let low = Some(0.0);
        assert_eq!(
            tuple(next_link_params_nr_itbs(&ctx(2, 64, high), &b)),
            (2, 128, Verdict::Adjusted)
        );
        assert_eq!(
            tuple(next_link_params_nr_itbs(&ctx(2, 128, high), &b)),
            (1, 128, Verdict::Adjusted)
        );
        assert_eq!(
            tuple(next_link_params_nr_itbs(&ctx(0, 128, high), &b)),
            (0, 128, Verdict::TargetUnreachable)
        );
        assert_eq!(
            tuple(next_link_params_nr_itbs(&ctx(2, 64, low), &b)),
            (2, 32, Verdict::Adjusted)
        );
        assert_eq!(
            tuple(next_link_params_nr_itbs(&ctx(2, 1, low), &b)),
            (3, 1, Verdict::Adjusted)
        );
        assert_eq!(
            tuple(next_link_params_nr_itbs(&ctx(3, 1, low), &b)),
            (3, 1, Verdict::FloorReached)
        );
    }

    #[test]
    fn single_axis_rules_pin_the_other_axis() {
        let b = Bounds::default();
        let high = Some(1.0);
        let low = Some(0.0);
        let itbs = |c: &DecisionContext| next_link_params_single_axis(c, &b, AdjustAxis::Itbs);
        let nr = |c: &DecisionContext| next_link_params_single_axis(c, &b, AdjustAxis::Nr);
        assert_eq!(tuple(itbs(&ctx(1, 128, high))), (0, 128, Verdict::Adjusted));
        assert_eq!(
            tuple(itbs(&ctx(0, 128, high))),
            (0, 128, Verdict::TargetUnreachable)
        );
        assert_eq!(tuple(itbs(&ctx(0, 128, low))), (1, 128, Verdict::Adjusted));
        assert_eq!(
            tuple(itbs(&ctx(3, 128, low))),
            (3, 128, Verdict::FloorReached)
        );
        assert_eq!(tuple(nr(&ctx(1, 64, high))), (1, 128, Verdict::Adjusted));
        assert_eq!(
            tuple(nr(&ctx(1, 128, high))),
            (1, 128, Verdict::TargetUnreachable)
        );
        assert_eq!(tuple(nr(&ctx(1, 2, low))), (1, 1, Verdict::Adjusted));
        assert_eq!(tuple(nr(&ctx(1, 1, low))), (1, 1, Verdict::FloorReached));
    }

    #[test]
    fn two_axis_rule_moves_both_and_clamps() {
        let b = Bounds::default();
        let high = Some(0.4);
        let low = Some(0.0);
        assert_eq!(
            tuple(next_link_params_itbs_and_nr(&ctx(2, 32, high), &b)),
            (1, 64, Verdict::Adjusted)
        );
        assert_eq!(
            tuple(next_link_params_itbs_and_nr(&ctx(0, 64, high), &b)),
            (0, 128, Verdict::Adjusted)
        );
        assert_eq!(
            tuple(next_link_params_itbs_and_nr(&ctx(2, 128, high), &b)),
            (1, 128, Verdict::Adjusted)
        );
        assert_eq!(
            tuple(next_link_params_itbs_and_nr(&ctx(0, 128, high), &b)),
            (0, 128, Verdict::TargetUnreachable)
        );
        assert_eq!(
            tuple(next_link_params_itbs_and_nr(&ctx(1, 64, low), &b)),
            (2, 32, Verdict::Adjusted)
        );
        assert_eq!(
            tuple(next_link_params_itbs_and_nr(&ctx(3, 1, low), &b)),
            (3, 1, Verdict::FloorReached)
        );
    }

    #[test]
    fn in_band_estimates_hold_everywhere() {
        let b = Bounds::default();
        for kind in ALL_STRATEGIES.iter().filter(|k| k.is_iterative()) {
            let c = ctx(2, 16, Some(0.05));
            let d = decide(*kind, &c, &b, None);
            assert_eq!(d.verdict, Verdict::InRange, "{kind}");
            assert_eq!(d.params, c.current, "{kind}");
        }
    }

    #[test]
    fn missing_estimates_hold_for_warm_up() {
        let b = Bounds::default();
        for kind in ALL_STRATEGIES.iter().filter(|k| k.is_iterative()) {
            let c = ctx(1, 4, None);
            let d = decide(*kind, &c, &b, None);
            assert_eq!(d.verdict, Verdict::WarmUp, "{kind}");
            assert_eq!(d.params, c.current, "{kind}");
        }
    }

    #[test]
    fn table_rule_jumps_to_the_stored_assignment() {
        let lut = Lut::from_csv_str(SAMPLE_LUT_CSV, 1.0).unwrap();
        let mut c = ctx(1, 1, None);
        c.snr_est = Some(Snr::new(-24.0).unwrap());
        let d = next_link_params_luts(&c, &lut);
        assert_eq!(tuple(d), (1, 128, Verdict::Adjusted));
        c.current = LinkParams::new(1, 128).unwrap();
        assert_eq!(
            next_link_params_luts(&c, &lut).verdict,
            Verdict::InRange
        );
        c.snr_est = Some(Snr::new(-30.0).unwrap());
        let d = next_link_params_luts(&c, &lut);
        assert_eq!(d.verdict, Verdict::TargetUnreachable);
        assert_eq!(d.params, c.current);
        c.snr_est = None;
        assert_eq!(next_link_params_luts(&c, &lut).verdict, Verdict::WarmUp);
    }

    #[test]
    fn starting_points_sit_mid_lattice() {
        let b = Bounds::default();
        for kind in ALL_STRATEGIES {
            let p = initial_params(kind, &b, 128).unwrap();
            assert_eq!(p.itbs(), 1);
            if kind == StrategyKind::ItbsOnly {
                assert_eq!(p.nr(), 128);
            } else {
                assert_eq!(p.nr(), 1);
            }
        }
    }

    #[test]
    fn names_round_trip_and_reject_unknowns() {
        for kind in ALL_STRATEGIES {
            assert_eq!(kind.name().parse::<StrategyKind>().unwrap(), kind);
        }
        let err = "sideways".parse::<StrategyKind>().unwrap_err();
        assert!(err.contains("itbs-nr"));
        assert!(err.contains("luts"));
    }

    #[test]
    fn bounds_validation_rejects_bad_repetitions() {
        assert!(Bounds::default().validate().is_ok());
        assert!(Bounds { nr_min: 3, ..Bounds::default() }.validate().is_err());
        assert!(Bounds { nr_min: 64, nr_max: 32, ..Bounds::default() }
            .validate()
            .is_err());
    }

    #[test]
    fn estimator_tracks_the_window_failure_fraction() {
        let mut est = BlerEstimator::new(20, 5);
        assert_eq!(est.estimate(), None);
        for _ in 0..4 {
            est.update(false);
        }
        assert_eq!(est.estimate(), None);
        est.update(false);
        assert_eq!(est.estimate(), Some(0.0));
        let mut est = BlerEstimator::new(20, 5);
        for i in 0..10 {
            est.update(i % 2 == 0);
        }
        assert_eq!(est.estimate(), Some(0.5));
        // Old samples slide out at capacity.
        let mut est = BlerEstimator::new(20, 5);
        for _ in 0..20 {
            est.update(true);
        }
        assert_eq!(est.estimate(), Some(1.0));
        for _ in 0..20 {
            est.update(false);
        }
        assert_eq!(est.estimate(), Some(0.0));
        assert_eq!(est.len(), 20);
    }

    fn drive_to_hold(kind: StrategyKind, mut params: LinkParams, est: f64) -> (Decision, u32) {
        let b = Bounds::default();
        for step in 1..=32 {
            let c = DecisionContext {
                current: params,
                bler_est: Some(est),
                snr_est: None,
                bler_t: 0.05,
                tbs: 256,
                tolerance: 0.025,
            };
            let d = decide(kind, &c, &b, None);
            if d.verdict != Verdict::Adjusted {
                return (d, step);
            }
            params = d.params;
        }
        panic!("{kind} never settled");
    }

    proptest! {
        #[test]
        fn decisions_stay_inside_bounds(
            itbs in 0u8..=3,
            nr_idx in 0usize..8,
            est in 0.0f64..=1.0,
            kind_idx in 0usize..5,
        ) {
            let kind = [
                StrategyKind::ItbsNr,
                StrategyKind::NrItbs,
                StrategyKind::ItbsOnly,
                StrategyKind::NrOnly,
                StrategyKind::ItbsAndNr,
            ][kind_idx];
            let b = Bounds::default();
            let c = ctx(itbs, NR_VALUES[nr_idx], Some(est));
            let d = decide(kind, &c, &b, None);
            prop_assert!(b.contains(d.params));
            prop_assert!(NR_VALUES.contains(&d.params.nr()));
            if d.verdict == Verdict::Adjusted {
                prop_assert_ne!(d.params, c.current);
            } else {
                prop_assert_eq!(d.params, c.current);
            }
        }

        #[test]
        fn persistent_pressure_settles_quickly(
            itbs in 0u8..=3,
            nr_idx in 0usize..8,
            kind_idx in 0usize..5,
            high in proptest::bool::ANY,
        ) {
            let kind = [
                StrategyKind::ItbsNr,
                StrategyKind::NrItbs,
                StrategyKind::ItbsOnly,
                StrategyKind::NrOnly,
                StrategyKind::ItbsAndNr,
            ][kind_idx];
            let start = LinkParams::new(itbs, NR_VALUES[nr_idx]).unwrap();
            let est = if high { 1.0 } else { 0.0 };
            let (d, steps) = drive_to_hold(kind, start, est);
            prop_assert!(steps <= 11, "{} took {} steps", kind, steps);
            if high {
                prop_assert_eq!(d.verdict, Verdict::TargetUnreachable);
            } else {
                prop_assert_eq!(d.verdict, Verdict::FloorReached);
            }
        }
    }
}
