use crate::error::{Error, Result};
use crate::layout::Cell;
use crate::lp::{solve_lp, LpProblem};

use super::{ChargeConfig, ChargeScheduler, ChargeSession, RateProfile};

/// Online linear program: at every arrival slot, re-plan all EVs present from
/// that slot on, maximising `sum (T - t) * r[i][t]` subject to peak rates,
/// remaining demand, and the optional network capacity. Rates between
/// arrivals follow the latest plan.
#[derive(Debug, Clone, Copy, Default)]
pub struct OlpScheduler;

struct Plan {
    session: usize,
    from: usize,
    rates: Vec<f64>,
}

impl ChargeScheduler for OlpScheduler {
    fn name(&self) -> &'static str {
        "olp"
    }

    fn schedule(
        &self,
        evses: &[Cell],
        sessions: &[ChargeSession],
        config: &ChargeConfig,
    ) -> Result<RateProfile> {
        config.validate()?;
        let n_slots = config.n_slots();
        let dh = config.slot_hours();
        let mut profile = RateProfile::zeros(evses.to_vec(), config);
        let rows: Vec<usize> = sessions
            .iter()
            .map(|s| {
                profile.row_of(s.evse).ok_or_else(|| {
                    Error::InvalidPlacement(format!("EVSE {:?} not in layout", s.evse))
                })
            })
            .collect::<Result<_>>()?;
        let mut remaining: Vec<f64> = sessions.iter().map(|s| s.energy_kwh).collect();

        let mut arrivals: Vec<usize> = sessions
            .iter()
            .filter(|s| !s.slots().is_empty())
            .map(|s| s.start_slot)
            .collect();
        arrivals.sort_unstable();
        arrivals.dedup();

        let mut plans: Vec<Plan> = Vec::new();
        let mut now = 0;
        for &slot in &arrivals {
            commit(&plans, now, slot, &rows, &mut profile, &mut remaining, dh);
            now = slot;
            plans = solve_at(slot, sessions, &remaining, config)?;
        }
        commit(
            &plans,
            now,
            n_slots,
            &rows,
            &mut profile,
            &mut remaining,
            dh,
        );
        Ok(profile)
    }
}

fn commit(
    plans: &[Plan],
    from: usize,
    to: usize,
    rows: &[usize],
    profile: &mut RateProfile,
    remaining: &mut [f64],
    dh: f64,
) {
    for plan in plans {
        let end = (plan.from + plan.rates.len()).min(to);
        for t in from.max(plan.from)..end {
            let rate = plan.rates[t - plan.from];
            profile.rates[rows[plan.session]][t] += rate;
            remaining[plan.session] = (remaining[plan.session] - rate * dh).max(0.0);
        }
    }
}

fn solve_at(
    now: usize,
    sessions: &[ChargeSession],
    remaining: &[f64],
    config: &ChargeConfig,
) -> Result<Vec<Plan>> {
    let n_slots = config.n_slots();
    let dh = config.slot_hours();
    let present: Vec<usize> = (0..sessions.len())
        .filter(|&i| {
            let s = &sessions[i];
            s.start_slot <= now && now < s.end_slot && remaining[i] > 1e-12
        })
        .collect();

    // Variable layout: each present session owns a contiguous block over now..end.
    let mut offsets = Vec::with_capacity(present.len());
    let mut objective = Vec::new();
    for &i in &present {
        offsets.push(objective.len());
        objective.extend((now..sessions[i].end_slot).map(|t| (n_slots - t) as f64));
    }
    let mut lp = LpProblem::new(objective);
    for (k, &i) in present.iter().enumerate() {
        let s = &sessions[i];
        let len = s.end_slot - now;
        for v in offsets[k]..offsets[k] + len {
            lp.set_upper_bound(v, s.peak_kw);
        }
        lp.add_constraint(
            (offsets[k]..offsets[k] + len).map(|v| (v, dh)).collect(),
            remaining[i],
        );
    }
    if let Some(cap) = config.network_capacity {
        for t in now..n_slots {
            let active: Vec<(usize, usize)> = present
                .iter()
                .copied()
                .enumerate()
                .filter(|&(_, i)| t < sessions[i].end_slot)
                .collect();
            // Rows that cannot bind are left out.
            let peak_sum: f64 = active.iter().map(|&(_, i)| sessions[i].peak_kw).sum();
            if peak_sum > cap {
                lp.add_constraint(
                    active
                        .iter()
                        .map(|&(k, _)| (offsets[k] + t - now, 1.0))
                        .collect(),
                    cap,
                );
            }
        }
    }
    let solution = solve_lp(&lp)?;
    Ok(present
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let len = sessions[i].end_slot - now;
            Plan {
                session: i,
                from: now,
                rates: solution.x[offsets[k]..offsets[k] + len].to_vec(),
            }
        })
        .collect())
}
