//! Built-in named scenarios: curated configurations of the commands,
//! each demonstrating one operational phenomenon.

use crate::runner::{
    CheckAxiomsArgs, CommandConfig, FpemArgs, NoSignallingArgs, SignallingArgs, SpaceDimsArgs,
    SpanRankArgs, SpoArgs,
};

pub struct Preset {
    pub id: &'static str,
    pub description: &'static str,
    pub seed: u64,
    pub command: CommandConfig,
}

pub fn catalog() -> Vec<Preset> {
    vec![
        Preset {
            id: "bell-sr-signalling",
            description: "state readout of half an entangled pair: a remote projective \
                          measurement flips its outcome distribution (TV 1, exit 1)",
            seed: 42,
            command: CommandConfig::Signalling(SignallingArgs::default()),
        },
        Preset {
            id: "bell-born-no-signalling",
            description: "same scenario read by an ordinary Born-rule marginal: the remote \
                          choice is invisible (TV 0, exit 0)",
            seed: 42,
            command: CommandConfig::Signalling(SignallingArgs {
                device: "born".into(),
                ..SignallingArgs::default()
            }),
        },
        Preset {
            id: "fpem-bell-signalling",
            description: "finite-precision entropy meter on half an entangled pair: remote \
                          collapse moves the bin from 0.99 to 0.00 (exit 1)",
            seed: 42,
            command: CommandConfig::Signalling(SignallingArgs {
                device: "fpem-vn".into(),
                ..SignallingArgs::default()
            }),
        },
        Preset {
            id: "spo-sequential-nonquantum",
            description: "positive-operator readout followed by a POVM: the joint cell is a \
                          quartic no Hermitian form fits (residual > 0.01, exit 1)",
            seed: 404,
            command: CommandConfig::Spo(SpoArgs::default()),
        },
        Preset {
            id: "fpem-span-growth",
            description: "rank profile of entropy-bin indicators under random rotations keeps \
                          growing with the family size (exit 0)",
            seed: 608,
            command: CommandConfig::SpanRank(SpanRankArgs::default()),
        },
        Preset {
            id: "renyi-span-growth",
            description: "same growth with the second-order Renyi meter (exit 0)",
            seed: 609,
            command: CommandConfig::SpanRank(SpanRankArgs {
                family: "renyi-bin".into(),
                ..SpanRankArgs::default()
            }),
        },
        Preset {
            id: "born-family-saturation",
            description: "rank profile of rotated Born-rule effects saturates at the qubit \
                          effect-space dimension 4 (exit 0)",
            seed: 606,
            command: CommandConfig::SpanRank(SpanRankArgs {
                family: "born".into(),
                ..SpanRankArgs::default()
            }),
        },
        Preset {
            id: "k2-family-saturation",
            description: "rank profile of power-two outcome functions saturates at 9 (exit 0)",
            seed: 607,
            command: CommandConfig::SpanRank(SpanRankArgs {
                family: "k2".into(),
                n: 24,
                m: 192,
                ..SpanRankArgs::default()
            }),
        },
        Preset {
            id: "axioms-quantum",
            description: "the quantum tensor rule passes all eight composition axioms at \
                          1e-9 over 1000 trials (exit 0)",
            seed: 2024,
            command: CommandConfig::CheckAxioms(CheckAxiomsArgs::default()),
        },
        Preset {
            id: "axioms-broken",
            description: "an epsilon-nonlinear composition rule is caught by the bilinearity \
                          and no-signalling checks (exit 1)",
            seed: 808,
            command: CommandConfig::CheckAxioms(CheckAxiomsArgs {
                star: "broken".into(),
                ..CheckAxiomsArgs::default()
            }),
        },
        Preset {
            id: "broken-no-signalling",
            description: "the same broken rule measured by the dedicated no-signalling \
                          check (exit 1)",
            seed: 809,
            command: CommandConfig::NoSignalling(NoSignallingArgs {
                star: "broken".into(),
                ..NoSignallingArgs::default()
            }),
        },
        Preset {
            id: "gpt-duality-qubit",
            description: "sampled qubit state cloud is 3-dimensional, its effect span \
                          4-dimensional (exit 0)",
            seed: 707,
            command: CommandConfig::SpaceDims(SpaceDimsArgs::default()),
        },
        Preset {
            id: "gpt-duality-qutrit",
            description: "sampled qutrit state cloud is 8-dimensional, its effect span \
                          9-dimensional (exit 0)",
            seed: 709,
            command: CommandConfig::SpaceDims(SpaceDimsArgs {
                dim: 3,
                functions: 19,
                samples: 220,
                ..SpaceDimsArgs::default()
            }),
        },
        Preset {
            id: "fpem-bins",
            description: "entropy-meter bin distribution of a weighted two-qubit state \
                          (0.2 gives bin 0.72, exit 0)",
            seed: 42,
            command: CommandConfig::Fpem(FpemArgs::default()),
        },
    ]
}

pub fn lookup(id: &str) -> Option<Preset> {
    catalog().into_iter().find(|p| p.id == id)
}

pub fn catalog_text() -> String {
    let mut out = String::from("built-in scenarios (run with `postulatelab run <id>`):\n");
    for p in catalog() {
        out.push_str(&format!("  {:<26} {}\n", p.id, p.description));
    }
    out
}
