from hypothesis import HealthCheck, settings

# The suite runs in throttled sandboxes; wall-clock deadlines would flake.
settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")
