"""OTFS / OFDM link-level laboratory.

Modems, a doubly-dispersive tap channel, RF front-end impairments, a
message-passing delay-Doppler receiver and Monte-Carlo BER / PAPR harnesses.
"""

__version__ = "0.1.0"
