class PreguardError(Exception):
    """
    Base class for every error raised by preguard itself
    """
