//! Builds a polygonal mesh, extends it with a padding layer, and writes it
//! in the plain-text exchange format.
//!
//!     cargo run --release --example mesh_io -- mesh.txt

use std::fs::File;
use std::io::{BufReader, BufWriter};

use padtop::geometry::Point2;
use padtop::mesh::{build_irregular, read_mesh, write_mesh, ExtensionSpec};

fn main() -> padtop::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "mesh.txt".into());
    let domain = [Point2::new(0.0, 0.0), Point2::new(2.0, 0.0), Point2::new(2.0, 1.0), Point2::new(0.0, 1.0)];
    let mesh = build_irregular(500, &domain, 7)?.extend(&ExtensionSpec::for_filter_radius(0.2))?;
    write_mesh(&mesh, BufWriter::new(File::create(&path)?))?;
    let back = read_mesh(BufReader::new(File::open(&path)?))?;
    println!(
        "{}: {} elements ({} original), {} nodes, identical after reading back: {}",
        path,
        back.len(),
        back.original_count(),
        back.nodes.len(),
        back == mesh
    );
    Ok(())
}
