//! Initial patches for the L^p and Hölder constructions, with their
//! parameter manifests.

use alpha_patch::bending::{make_initial_patch, BendOptions, PatchSpec};
use alpha_patch::biot_savart::AlphaParam;

fn main() -> alpha_patch::Result<()> {
    let a = AlphaParam::new(0.25)?;
    for spec in [PatchSpec::Lp { p: 4.0 }, PatchSpec::Holder { beta: 0.5 }] {
        let patch = make_initial_patch(spec, a, 2048, BendOptions::default())?;
        println!("{}", serde_json::to_string_pretty(&patch.manifest).expect("manifest serializes"));
        println!("length {:.9}, area {:.9}", patch.bend.curve.length(), patch.bend.curve.area());
    }
    Ok(())
}
