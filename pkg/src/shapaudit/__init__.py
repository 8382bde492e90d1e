"""Cross-model Shapley feature-importance reliability auditing."""
