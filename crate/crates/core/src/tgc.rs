//! Train-gate-controller benchmark generator.
//!
//! The controller `C` must hand out a `grant_i` as soon as it is idle and
//! then waits in `busy_i` until the granted train reports `done_i`. Train `i`
//! spends exactly `n + 1 - i` time units in the tunnel. After its first
//! passage a train keeps the `passed_i` label and can be granted again.
//! The controller's locations say nothing about which trains have passed.

use std::fmt::Write;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TgcConfig {
    pub n: usize,
    pub t: u32,
}

/// Tunnel duration of train `i` (1-based).
pub fn tunnel_duration(n: usize, i: usize) -> u32 {
    (n + 1 - i) as u32
}

/// Model text for `n ≥ 1` trains.
pub fn gen_tgc_model(n: usize) -> String {
    assert!(n >= 1, "at least one train");
    let mut out = String::new();
    let grants: Vec<String> = (1..=n).map(|i| format!("grant_{i}")).collect();
    out.push_str("agent C {\n  clocks c;\n  init idle;\n");
    writeln!(out, "  loc idle invariant c <= 0 {{\n    protocol {};", grants.join(", ")).unwrap();
    for i in 1..=n {
        writeln!(out, "    on grant_{i} goto {{ 1: -> busy_{i}; }}").unwrap();
    }
    out.push_str("  }\n");
    for i in 1..=n {
        writeln!(
            out,
            "  loc busy_{i} {{\n    protocol done_{i};\n    on done_{i} goto {{ 1: reset {{c}} -> idle; }}\n  }}"
        )
        .unwrap();
    }
    out.push_str("}\n");
    for i in 1..=n {
        let d = tunnel_duration(n, i);
        write!(
            out,
            "
agent train_{i} {{
  clocks x_{i};
  init wait;
  loc wait {{
    protocol grant_{i};
    on grant_{i} goto {{ 1: reset {{x_{i}}} -> tunnel; }}
  }}
  loc tunnel invariant x_{i} <= {d} {{
    protocol done_{i};
    on done_{i} when x_{i} = {d} goto {{ 1: -> passed; }}
  }}
  loc passed {{
    labels passed_{i};
    protocol grant_{i};
    on grant_{i} goto {{ 1: reset {{x_{i}}} -> tunnel_again; }}
  }}
  loc tunnel_again invariant x_{i} <= {d} {{
    labels passed_{i};
    protocol done_{i};
    on done_{i} when x_{i} = {d} goto {{ 1: -> passed; }}
  }}
}}
"
        )
        .unwrap();
    }
    out
}

/// `<<C>> P>=0.8 F[0,T] (passed_1 & passed_2)`; needs two trains.
pub fn gen_tgc_formula(n: usize, t: u32) -> Result<String> {
    if n < 2 {
        return Err(Error::TgcTooFewTrains(n));
    }
    Ok(format!("<<C>> P>=0.8 F[0,{t}] (passed_1 & passed_2)"))
}

pub fn gen_tgc(config: TgcConfig) -> Result<(String, String)> {
    let formula = gen_tgc_formula(config.n, config.t)?;
    Ok((gen_tgc_model(config.n), formula))
}
