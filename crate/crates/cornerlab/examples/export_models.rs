//! Writes the built-in models as JSON spec files.
//!
//!     cargo run -p cornerlab --example export_models -- models/

use std::path::PathBuf;

use cornerlab::model::ModelSpec;
use cornerlab::models;

fn main() -> cornerlab::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "models".into()));
    std::fs::create_dir_all(&dir)?;
    let ssh = models::ssh(0.4, 1.0)?;
    let kitaev = models::kitaev(0.0, 0.5, 0.5)?;
    let cii = models::cii_chain(0.3, 1.0, 0.4)?;
    let specs: Vec<(&str, ModelSpec)> = vec![
        ("ssh", ssh.clone()),
        ("ssh_critical", models::ssh(1.0, 1.0)?),
        ("kitaev", kitaev.clone()),
        ("cii_chain", cii.clone()),
        ("pwave", models::pwave(-2.0, 1.0, 1.0)?),
        ("helical_diii", models::helical_diii(-2.0, 1.0, 1.0)?),
        ("class_c", models::class_c(-2.0, 1.0, 1.0)?),
        ("ssh_x_ssh", models::product_hamiltonian(&ssh, &ssh)?.spec),
        ("kitaev_x_kitaev", models::product_hamiltonian(&kitaev, &kitaev)?.spec),
        ("ssh_x_kitaev", models::product_hamiltonian(&ssh, &kitaev)?.spec),
        ("cii_x_ssh", models::product_hamiltonian(&cii, &ssh)?.spec),
    ];
    for (name, spec) in specs {
        let path = dir.join(format!("{name}.json"));
        std::fs::write(&path, spec.to_json()? + "\n")?;
        println!("{}", path.display());
    }
    Ok(())
}
