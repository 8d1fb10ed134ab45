//! One forward solve: build the body mesh, apply a Gaussian source at a
//! chosen point and probe the displacement field at the sensor face.
//!
//! Run with: cargo run --release --example forward_solve

use std::sync::Arc;

use elastiloc::fem::{assemble, body_force, solve, Material, SourceSpec, DEFAULT_REL_TOL};
use elastiloc::mesh::{build_mesh, DomainBounds};

fn main() -> elastiloc::Result<()> {
    let bounds = DomainBounds::default();
    let mesh = Arc::new(build_mesh((10, 5, 4), bounds)?);
    println!(
        "mesh 10x5x4: {} nodes, {} elements, {} dofs",
        mesh.node_count(),
        mesh.element_count(),
        3 * mesh.node_count()
    );

    let source = SourceSpec::new([0.15, 0.0, 0.025], 1.0, 0.01)?;
    println!(
        "source at {:?}, eps = {}, force at centre = {:?} N/m^3",
        source.center(),
        source.eps(),
        body_force(source.center(), &source)
    );

    let system = assemble(&mesh, &Material::default(), &source)?;
    let (field, report) = solve(&system, DEFAULT_REL_TOL)?;
    println!(
        "solved in {} CG iterations, relative residual {:.2e}",
        report.iterations, report.relative_residual
    );

    // Probe the top face along the x axis.
    println!("\n  x (m)    |u| at the sensor face z = 0.05 (m)");
    for i in 0..=10 {
        let x = 0.03 * i as f64;
        let u = field.eval_displacement([x, 0.0, 0.05])?;
        let mag = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        let bar = "#".repeat((mag / 2e-7).round() as usize);
        println!("  {x:.2}      {mag:.3e}  {bar}");
    }

    let g = field.eval_gradient([0.15, 0.0, 0.05])?;
    println!("\ngradient at the central microphone site:");
    for (i, row) in g.iter().enumerate() {
        println!("  du{}/d(x,y,z) = {:+.3e} {:+.3e} {:+.3e}", i + 1, row[0], row[1], row[2]);
    }
    Ok(())
}
