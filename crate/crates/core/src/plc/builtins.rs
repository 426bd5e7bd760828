//! Native models of the TON on-delay timer and the CTUD up/down counter.

use crate::st::IntDomain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct TonState {
    pub in_prev: bool,
    /// Elapsed time in milliseconds, always within `0..=PT`.
    pub et: i64,
    pub q: bool,
}

/// One call of a TON instance. `elapsed` is the time since the previous call:
/// the cycle time on the first call of a scan, zero on repeated calls.
pub fn ton_step(state: TonState, input: bool, preset: i64, elapsed: i64) -> TonState {
    let preset = preset.max(0);
    if !input {
        return TonState {
            in_prev: false,
            et: 0,
            q: false,
        };
    }
    let et = if state.in_prev {
        state.et.saturating_add(elapsed).min(preset)
    } else {
        0
    };
    TonState {
        in_prev: true,
        et,
        q: et >= preset,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CtudState {
    pub cv: i64,
    pub qu: bool,
    pub qd: bool,
    pub cu_prev: bool,
    pub cd_prev: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CtudInputs {
    pub cu: bool,
    pub cd: bool,
    pub r: bool,
    pub ld: bool,
    pub pv: i64,
}

/// One call of a CTUD instance; `domain` bounds the counter value.
pub fn ctud_step(state: CtudState, inputs: CtudInputs, domain: IntDomain) -> CtudState {
    let up = inputs.cu && !state.cu_prev;
    let down = inputs.cd && !state.cd_prev;
    let cv = if inputs.r {
        domain.clamp(0)
    } else if inputs.ld {
        domain.clamp(inputs.pv)
    } else if up && down {
        state.cv
    } else if up {
        (state.cv + 1).min(domain.hi)
    } else if down {
        (state.cv - 1).max(domain.lo)
    } else {
        state.cv
    };
    CtudState {
        cv,
        qu: cv >= inputs.pv,
        qd: cv <= 0,
        cu_prev: inputs.cu,
        cd_prev: inputs.cd,
    }
}
