//! Every pass/fail threshold used by the suites, with the reason for its value.

pub struct Threshold {
    pub name: &'static str,
    pub value: f64,
    pub rationale: &'static str,
}

/// Analytic tolerance on the Σ-class properties of σ_ε.
pub const SIGMA_TOLERANCE: f64 = 1e-9;
/// Relative L∞ error of the homogeneous run against the RK4 kinetics.
pub const ODE_RELATIVE_ERROR: f64 = 1e-4;
/// Error reduction when the ODE-oracle step is halved.
pub const ODE_HALVING_RATIO: f64 = 3.5;
/// Mass drift versus the accumulated kinetic ledger, relative.
pub const MASS_LEDGER: f64 = 1e-10;
/// Slack on the combined-mass exponential envelope.
pub const ENVELOPE_SLACK: f64 = 0.05;
/// Slack on the `(2 + √n)²` gradient inequality.
pub const INEQUALITY_SLACK: f64 = 0.05;
/// Refinement stability of energies and dissipation ledgers.
pub const REFINEMENT_STABILITY: f64 = 0.10;
/// Refinement stability of `sup_t ‖v‖∞`.
pub const SUP_V_STABILITY: f64 = 0.05;
/// Smallest accepted MMS order, diffusion-dominated.
pub const MMS_DIFFUSION_ORDER: f64 = 1.9;
/// Smallest accepted MMS order, taxis-dominated.
pub const MMS_TAXIS_ORDER: f64 = 0.9;
/// Smallest accepted MMS order in time.
pub const MMS_TEMPORAL_ORDER: f64 = 1.9;
/// Refinement comparisons treat two values below this magnitude as equal.
pub const ROUNDING_FLOOR: f64 = 1e-12;
/// Largest accepted final ε-difference relative to the first one.
pub const EPSILON_FINAL_RATIO: f64 = 0.5;

pub const TABLE: [Threshold; 13] = [
    Threshold {
        name: "sigma_tolerance",
        value: SIGMA_TOLERANCE,
        rationale: "the cutoff integral is tabulated to about 1e-12; 1e-9 leaves room for rounding near the plateau",
    },
    Threshold {
        name: "ode_relative_error",
        value: ODE_RELATIVE_ERROR,
        rationale: "second-order steps at dt = 1e-3 sit near 1e-6, two decades below",
    },
    Threshold {
        name: "ode_halving_ratio",
        value: ODE_HALVING_RATIO,
        rationale: "the asymptotic ratio for a second-order method is 4",
    },
    Threshold {
        name: "mass_ledger",
        value: MASS_LEDGER,
        rationale: "fluxes telescope exactly, so only rounding accumulated over the run remains",
    },
    Threshold {
        name: "envelope_slack",
        value: ENVELOPE_SLACK,
        rationale: "covers time discretization of an envelope that is itself not tight",
    },
    Threshold {
        name: "inequality_slack",
        value: INEQUALITY_SLACK,
        rationale: "difference quotients replace derivatives on both sides",
    },
    Threshold {
        name: "refinement_stability",
        value: REFINEMENT_STABILITY,
        rationale: "the bounding constants are not explicit; boundedness shows as stability under h to h/2",
    },
    Threshold {
        name: "sup_v_stability",
        value: SUP_V_STABILITY,
        rationale: "the sup-norm is a pointwise quantity and converges faster than the energies",
    },
    Threshold {
        name: "mms_diffusion_order",
        value: MMS_DIFFUSION_ORDER,
        rationale: "second-order operators; 0.1 absorbs pre-asymptotic effects",
    },
    Threshold {
        name: "mms_taxis_order",
        value: MMS_TAXIS_ORDER,
        rationale: "first-order upwinding of the taxis flux",
    },
    Threshold {
        name: "mms_temporal_order",
        value: MMS_TEMPORAL_ORDER,
        rationale: "symmetric splitting with second-order substeps",
    },
    Threshold {
        name: "epsilon_final_ratio",
        value: EPSILON_FINAL_RATIO,
        rationale: "halving ε should shrink successive differences; the last must be at most half the first",
    },
    Threshold {
        name: "rounding_floor",
        value: ROUNDING_FLOOR,
        rationale: "gradients of a homogeneous field are pure rounding, near 1e-30 after squaring",
    },
];

pub fn lookup(name: &str) -> Option<&'static Threshold> {
    TABLE.iter().find(|t| t.name == name)
}
