import os
from functools import lru_cache

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError

from src.aeq_search.errors import ConfigurationError

# Environment variable -> Settings field
ENV_VARIABLES = {
    "AEQ_JOBS": "jobs",
    "AEQ_LOG_LEVEL": "log_level",
    "AEQ_FLOAT_TOLERANCE": "float_tolerance",
    "AEQ_EMBED_RESTARTS": "embed_restarts",
}


class Settings(BaseModel):
    jobs: int = Field(1, ge=1, description="Default worker count for enumeration and embedding")
    log_level: str = Field("INFO", description="Root log level used by the CLI")
    float_tolerance: float = Field(1e-9, gt=0, description="Tolerance on squared distances in floating mode")
    embed_restarts: int = Field(100, ge=1, description="Default restart count for the embedding prober")


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """
    Read settings from the environment, loading a `.env` file first if present.

    Returns:
        Settings with defaults for every variable that is not set

    Raises:
        ConfigurationError: If a variable is set to a value that does not validate
    """
    load_dotenv()
    values = {}
    for env_name, field_name in ENV_VARIABLES.items():
        raw = os.environ.get(env_name)
        if raw is not None and raw.strip():
            values[field_name] = raw.strip()
    try:
        return Settings(**values)
    except ValidationError as e:
        field = e.errors()[0]["loc"][0]
        env_name = next(k for k, v in ENV_VARIABLES.items() if v == field)
        raise ConfigurationError(f"Invalid value for {env_name}: {e.errors()[0]['msg']}") from e
