"""
Configurações do toolkit de cadeia de leitura criogênica.
Edite este arquivo para personalizar os valores padrão.
"""

# --- Constantes físicas ---
T0_KELVIN = 290.0  # Temperatura de referência IEEE para NF e ENR
BOLTZMANN = 1.380649e-23  # J/K (exato, SI 2019)

# --- Rede RF ---
DEFAULT_Z_REF = 50.0  # ohms
PASSIVITY_TOLERANCE = 1e-9  # folga numérica em |S21|·|S12| <= 1

# --- Cabos com gradiente térmico ---
DEFAULT_CABLE_SEGMENTS = 64  # segmentos de mesmo dB no modelo distribuído

# --- Calibração de ruído ---
MIN_DUT_GAIN_DB = 10.0  # abaixo disso a extração fica dominada pelo backend

# --- Leitura dispersiva ---
SHOT_BLOCK_SIZE = 65536  # tiros por bloco do gerador contador (independe de workers)
DEFAULT_HISTOGRAM_BINS = 100

# --- Orçamento de potência ---
DEFAULT_ALLOCATION_FRACTION = 1.0 / 3.0  # "1 W dos 3 W" do estágio de 4 K

# --- Saída ---
OUTPUT_DIR = "output"
SIGNIFICANT_DIGITS = 9
FLOAT_FORMAT = f"%.{SIGNIFICANT_DIGITS}g"

# --- Log ---
LOG_LEVEL_ENV = "CRYOCHAIN_LOG_LEVEL"
DEFAULT_LOG_LEVEL = "INFO"
