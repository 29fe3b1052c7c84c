import math


def format_number(value, digits=1):
    """Format a number with thousands separator and specified decimal places."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "n/a"
    return f"{value:,.{digits}f}"


def format_percent(value, digits=1):
    """Format a fraction in [0, 1] as a percentage."""
    if value is None or math.isnan(value):
        return "n/a"
    return f"{100 * value:.{digits}f}%"


def format_db(value):
    """Format an SNR in dB; exact recoveries are infinite."""
    if value is None or math.isnan(value):
        return "n/a"
    if math.isinf(value):
        return "∞ dB" if value > 0 else "-∞ dB"
    return f"{value:.2f} dB"


def format_seconds(value):
    """Format a wall time with a unit that keeps three significant digits readable."""
    if value is None or math.isnan(value):
        return "n/a"
    if value < 1e-3:
        return f"{value * 1e6:.0f} µs"
    if value < 1:
        return f"{value * 1e3:.1f} ms"
    return f"{value:.2f} s"
