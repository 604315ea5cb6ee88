use daefix_core::model::write_expr;
use daefix_core::symbolic::{partial, VarId};
fn main() {
    let text = std::fs::read_to_string("models/robotarm.dae").unwrap();
    let sys = daefix_core::model::parse_model(&text).unwrap();
    let c_expr = &sys.equations[2].expr;
    let p4 = partial(c_expr, VarId(3), 0);
    println!("dC/dx4 = {}", write_expr(&p4, &sys));
    println!("dC/dx4 debug: {:?}", p4);
}
