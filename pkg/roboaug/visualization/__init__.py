from .model_visualization import *
from .comparison_analysis import *
