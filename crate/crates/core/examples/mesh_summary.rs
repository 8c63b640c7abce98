//! Builds a mesh and prints its cells and resolved interfaces. Locally
//! aligned meshes are non-conforming unless the column offset is an integer
//! number of cells.
//!
//! ```text
//! cargo run --example mesh_summary [alignment nx ny b1 b2]
//! cargo run --example mesh_summary aligned_bottom_top 3 2 1.165939761 1
//! ```

use fadg::geometry::{aspect_ratios, build_mesh, choose_alignment, Alignment, FieldDirection, MeshConfig};

fn main() -> fadg::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (alignment, nx, ny, b) = if args.len() == 5 {
        (
            args[0].parse::<Alignment>()?,
            args[1].parse().expect("nx"),
            args[2].parse().expect("ny"),
            FieldDirection::new(args[3].parse().expect("b1"), args[4].parse().expect("b2"))?,
        )
    } else {
        (Alignment::AlignedBottomTop, 3, 2, FieldDirection::new(1.165939761, 1.0)?)
    };
    let config = MeshConfig::new(nx, ny, alignment, b);
    let mesh = build_mesh(config)?;
    let (bt, lr) = aspect_ratios(b);
    println!("aspect ratios: bottom/top {bt:.4}, left/right {lr:.4} -> {}", choose_alignment(b));
    println!("column offset {:.6} cells", config.nonconformity_ratio());
    let conforming = mesh.interfaces.iter().filter(|f| f.is_conforming()).count();
    let aligned = mesh.interfaces.iter().filter(|f| f.aligned).count();
    println!(
        "{} interfaces: {conforming} conforming, {aligned} along b",
        mesh.interfaces.len()
    );
    print!("{}", mesh.summary());
    Ok(())
}
