//! Windowed local statistics on a sinogram grid.
//!
//! Builds a small grid with an impulse, then prints the local mean and
//! standard deviation a 7x5x3 window produces, including the shrink-to-fit
//! behavior at the grid edges.
//!
//! ```bash
//! cargo run --release --example window_stats
//! ```

use lowsig::{local_stats, Dims, SinogramGrid, Stage, WindowSpec};

fn main() {
    let dims = Dims::new(15, 5, 3);
    let mut grid = SinogramGrid::filled(dims, Stage::Counts, 10.0);
    grid.set(7, 2, 1, 220.0); // impulse in the middle
    grid.set(0, 0, 0, 100.0); // corner: its window holds only 4*3*2 cells

    let w = WindowSpec::from_full([7, 5, 3]).unwrap();
    let stats = local_stats(&grid, w);

    println!("input row 2, view 1:");
    print_channels(&grid, 2, 1);
    println!("local mean (7x5x3 window):");
    print_channels(&stats.mean, 2, 1);
    println!("local std:");
    print_channels(&stats.std, 2, 1);

    println!(
        "corner cell (0,0,0): value {:.0}, window mean {:.2} over its in-bounds 4x3x2 block",
        grid.get(0, 0, 0),
        stats.mean.get(0, 0, 0)
    );
}

fn print_channels(g: &SinogramGrid, row: usize, view: usize) {
    let line: Vec<String> = (0..g.dims().channels)
        .map(|c| format!("{:6.1}", g.get(c, row, view)))
        .collect();
    println!("  [{}]", line.join(" "));
}
