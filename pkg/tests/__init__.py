"""Tests for the itemfair toolkit."""
