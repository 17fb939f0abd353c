pub mod table2_oracle;
