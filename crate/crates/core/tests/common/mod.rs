pub mod matrix_table;
pub mod oracle;
pub mod scrub_oracle;
