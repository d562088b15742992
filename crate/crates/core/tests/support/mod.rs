pub mod rank_oracle;
