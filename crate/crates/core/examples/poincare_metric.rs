//! Distances in both models, the Cayley transform and disk automorphisms.

use num_complex::Complex64;
use parabolic_lab::geometry::{aut_sending_center_to, cayley, distance, MobiusAut, Point};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let z = Point::disk(Complex64::new(0.5, 0.0))?;
    let w = Point::disk(Complex64::new(0.0, 0.5))?;
    let d = distance(&z, &w)?;
    println!("disk:       d(0.5, 0.5i) = {:.12}", d.value());

    let (hz, hw) = (cayley(&z)?, cayley(&w)?);
    println!("half-plane: d(Ψ(0.5), Ψ(0.5i)) = {:.12}", distance(&hz, &hw)?.value());

    let g = MobiusAut::disk(0.7, Complex64::new(-0.3, 0.4))?;
    let moved = distance(&g.apply(&z)?, &g.apply(&w)?)?;
    println!("after an automorphism: {:.12}", moved.value());

    let to_z = aut_sending_center_to(&z);
    println!("center sent to {}", to_z.apply(&Point::center(parabolic_lab::geometry::Model::Disk))?.coord());
    Ok(())
}
