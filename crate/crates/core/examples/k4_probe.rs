// ad-hoc: k=4 convex quadrilateral with four distinct slopes
use prony2d::geometry::{edge_frame, validate_polygon, Vec2};
use prony2d::pipeline::{identify_polygon, sample_polygon};
use prony2d::sampling::polygon_grid;

fn main() {
    let v = |x: f64, y: f64| Vec2::new(x, y);
    let p = validate_polygon(&[
        v(0.2, 0.15),
        v(0.7, 0.25),
        v(0.8, 0.65),
        v(0.25, 0.8),
    ])
    .unwrap();
    let slopes = edge_frame(&p).slopes;
    println!("k = {}", slopes.k());
    let set = polygon_grid(slopes.k(), 4).unwrap();
    println!("set size = {}", set.len());
    let samples = sample_polygon(&p, &set);
    match identify_polygon(&samples, &slopes, 4) {
        Ok(q) => {
            let n = p.len();
            let best = (0..n)
                .map(|s| {
                    (0..n)
                        .map(|i| {
                            let a = p.vertices()[i];
                            let b = q.vertices()[(i + s) % n];
                            (a - b).norm()
                        })
                        .fold(0.0f64, f64::max)
                })
                .fold(f64::INFINITY, f64::min);
            println!("identified, vertex error {best:.3e}");
        }
        Err(e) => println!("ERR: {e}"),
    }
}
