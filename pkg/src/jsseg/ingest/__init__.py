"""Builders of symbol sequences from play scripts and MIDI files."""
