"""Link-level simulation of the NB-IoT-U downlink in the unlicensed Sub-1 GHz band."""

__version__ = "0.1.0"
