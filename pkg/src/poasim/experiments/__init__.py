"""Sweeps, replays, report files and the bundled experiment presets."""
