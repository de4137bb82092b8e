"""Link-level simulator for indoor hybrid Wi-Fi and visible-light access."""

__version__ = "0.1.0"
