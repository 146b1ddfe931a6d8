//! Rank and inverse over Q and F_p.
use sixfun::exactalg::{FieldSpec, Matrix};

fn main() {
    for k in ["Q", "F2", "F3"] {
        let field: FieldSpec = k.parse().unwrap();
        let m = Matrix::from_rows(field, &[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]);
        println!("{k}: rank {}, invertible {}", m.rank(), m.inverse().is_some());
    }
}
