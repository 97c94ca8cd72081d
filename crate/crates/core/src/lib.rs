pub mod approxbounds;
pub mod classify;
pub mod dcbounds;
pub mod exprcore;
pub mod recmodel;
pub mod linsolve;
pub mod summation;
pub mod transforms;
pub mod varsolve;
pub mod verify;
