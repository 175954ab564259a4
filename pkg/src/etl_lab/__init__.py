"""Trust-modulated tabular learners and the social-dilemma testbeds they run in."""

__version__ = "0.1.0"
