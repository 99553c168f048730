"""Unit test package for evidential_ogm."""
