//! Direct implementation of the TeaStore experiment, independent of the
//! Chips pipeline. Used as the second route of the end-to-end checks and as
//! a library for running the same equations without the toolchain.

use crate::runtime::builtins::{lru_resize, lru_update, round_to_int};
use crate::runtime::trace::TraceRecord;
use crate::runtime::{Prng, SimConfig};

use super::{ActionRequest, Phase, TeaStoreParams};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PidState {
    pub error: f64,
    pub prev_error: f64,
    pub integral: f64,
    pub raw_output: f64,
    pub knob: i64,
}

impl PidState {
    pub fn new(params: &TeaStoreParams) -> PidState {
        PidState {
            knob: params.cache_min_size,
            ..PidState::default()
        }
    }

    /// One controller update. `measured` also gives the step length when the
    /// integral runs in seconds.
    pub fn update(&mut self, command: f64, measured: f64, p: &TeaStoreParams) {
        let lo = p.cache_min_size as f64;
        let hi = p.cache_max_size as f64;
        let dt = if p.pid_integrate_seconds && measured > 0.0 {
            measured
        } else {
            1.0
        };
        self.error = command - measured;
        let derivative = (self.error - self.prev_error) / dt;
        let candidate = self.integral + self.error * dt;
        self.raw_output = p.pid_p * self.error + p.pid_i * candidate + p.pid_d * derivative;
        let push = p.pid_i * self.error;
        if (self.raw_output > hi && push > 0.0) || (self.raw_output < lo && push < 0.0) {
            self.raw_output = p.pid_p * self.error + p.pid_i * self.integral + p.pid_d * derivative;
        } else {
            self.integral = candidate;
        }
        self.knob = round_to_int(self.raw_output.clamp(lo, hi)).expect("clamped value fits");
        self.prev_error = self.error;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProviderState {
    /// LRU order, least recent first.
    pub cache: Vec<i64>,
    /// Capacity used by the next round.
    pub cache_size: i64,
    pub pid: PidState,
}

impl ProviderState {
    pub fn new(params: &TeaStoreParams) -> ProviderState {
        ProviderState {
            cache: Vec::new(),
            cache_size: params.cache_min_size,
            pid: PidState::new(params),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub misses: i64,
    pub response_time_s: f64,
    /// Capacity in effect during the round.
    pub cache_size: i64,
}

/// The request of round `request_index` (1-based) and its image IDs.
pub fn generate_user_action(
    phase: &Phase,
    request_index: u64,
    prng: &mut Prng,
    params: &TeaStoreParams,
) -> (ActionRequest, Vec<i64>) {
    let n = phase.images_per_request;
    let ids = (0..n).map(|_| prng.range_inclusive(1, params.db_size)).collect();
    let action = ActionRequest {
        is_heavy_request: n > 2,
        request_private_page: true,
        provides_right_auth_data: request_index == 1,
    };
    (action, ids)
}

/// Serves `ids` from the cache, then lets the controller pick the next
/// capacity.
pub fn provider_round(ids: &[i64], st: &mut ProviderState, params: &TeaStoreParams) -> RoundOutcome {
    let cap = st.cache_size;
    lru_resize(&mut st.cache, cap as usize);
    let mut misses = 0i64;
    for &id in ids {
        if !st.cache.contains(&id) {
            misses += 1;
        }
        lru_update(&mut st.cache, id, cap as usize);
    }
    let response_time_s = params.cache_search_time_s + misses as f64 * params.db_req_time_s;
    st.pid.update(params.required_response_time_s, response_time_s, params);
    st.cache_size = st.pid.knob;
    RoundOutcome {
        misses,
        response_time_s,
        cache_size: cap,
    }
}

/// Trace of `config.max_rounds` rounds computed directly.
pub fn reference_trace(config: &SimConfig) -> Vec<TraceRecord> {
    let params = &config.params;
    let mut prng = Prng::new(config.seed);
    let mut st = ProviderState::new(params);
    let mut connected = false;
    let mut sim_time = 0.0;
    let mut out = Vec::new();
    for round in 1..=config.max_rounds {
        let phase = &config.scenario.phases[config.scenario.phase_index(round)];
        let (action, ids) = generate_user_action(phase, round, &mut prng, params);
        connected |= action.provides_right_auth_data;
        let o = provider_round(&ids, &mut st, params);
        sim_time += o.response_time_s;
        out.push(TraceRecord {
            round,
            sim_time_s: sim_time,
            images_requested: ids.len() as i64,
            cache_misses: o.misses,
            response_time_s: o.response_time_s,
            error_s: st.pid.error,
            integral_term: st.pid.integral,
            cache_size: o.cache_size,
            user_connected: connected,
        });
    }
    out
}
