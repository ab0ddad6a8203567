//! Regenerate the bundled demo asset set.
//!
//! ```text
//! cargo run -p crowd-lod-cli --example make_demo -- demo
//! ```

use std::fs;
use std::path::PathBuf;

use crowd_lod::imaging::{save_png, Rect};
use crowd_lod::mesh_lod::write_obj;
use crowd_lod::splat_lod::write_ply;
use crowd_lod::study_stats::trials_to_csv;
use crowd_lod::synth;

const CONFIG: &str = r#"# Demo pipeline: every generator at reduced scale.
output = "out"

[impostor]
frames = "frames"
sizes = [128, 64, 32, 16]
cols = 6
rows = 10

[mesh]
input = "character.obj"
ratios = [1.0, 0.5, 0.25, 0.125]

[splats]
input = "character.ply"
caps = [3000, 750, 190, 48]
alpha_min = 0.01
importance = "opacity"

[nerf]
lods = [0, 1, 2, 3]

[schedule]
agents = "agents.csv"
budget = "40MB"
"#;

const AGENTS: &str = "id,footprint_ratio
hero,1.2
a01,0.95
a02,0.81
a03,0.66
a04,0.58
a05,0.43
a06,0.37
a07,0.29
a08,0.21
a09,0.14
a10,0.08
a11,0.05
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "demo".into()));
    let frames_dir = dir.join("frames");
    fs::create_dir_all(&frames_dir)?;

    let body = Rect::new(40, 30, 140, 236).expect("non-empty body");
    for (i, frame) in synth::walker_sequence(60, 256, 256, body).iter().enumerate() {
        save_png(frame, frames_dir.join(format!("frame_{i:03}.png")))?;
    }
    write_obj(&synth::icosphere(3), &dir.join("character.obj"))?;
    write_ply(&synth::random_cloud(4000, 1, 7), &dir.join("character.ply"))?;
    fs::write(dir.join("agents.csv"), AGENTS)?;
    fs::write(dir.join("trials.csv"), trials_to_csv(&synth::study_trials(12, 6, 0.8, 11)))?;
    fs::write(dir.join("demo.toml"), CONFIG)?;
    println!("demo assets written to {}", dir.display());
    Ok(())
}
