"""Shared infrastructure: errors and study configuration."""
