//! Penalty function and coalition value on pooled resources.

use coalsim::model::{aggregate_requirements, coalition_value, gamma, satisfies_properties, IdentityVector, Task, ValueParams};
use coalsim::geometry::Point2D;

fn main() -> coalsim::Result<()> {
    for x in [0.5, 1.0, 1.5, 3.0] {
        println!("gamma({x}) = {}  (boundary infeasible: {})", gamma(x, 1e9, true), gamma(x, 1e9, false));
    }

    let tasks = [
        Task { id: 0, required_properties: vec![1.0, 0.0], required_resources: vec![20.0, 4.0], location: Point2D::new(0.0, 0.0) },
        Task { id: 1, required_properties: vec![0.0, 1.0], required_resources: vec![10.0, 0.0], location: Point2D::new(0.0, 0.0) },
    ];
    let req = aggregate_requirements(&tasks)?;
    println!("requirement: floor {:?}, totals {:?}", req.properties_floor, req.resources_total);

    let a = IdentityVector::new(vec![1.0, 1.0], vec![18.0, 2.0])?;
    let b = IdentityVector::new(vec![1.0, 0.0], vec![15.0, 3.0])?;
    let c = IdentityVector::new(vec![1.0, 1.0], vec![6.0, 1.0])?;
    println!("a qualifies: {}, b qualifies: {}", satisfies_properties(&a, &req)?, satisfies_properties(&b, &req)?);
    let params = ValueParams::default();
    println!("v(a, b) = {}", coalition_value(&[a.clone(), b], &req, params)?);
    println!("v(a, c) = {}", coalition_value(&[a, c], &req, params)?);
    Ok(())
}
