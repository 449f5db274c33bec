"""Stereo-consistent conditional CycleGAN for cross-domain image translation."""
