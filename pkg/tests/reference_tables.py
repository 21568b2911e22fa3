"""Step-count means and efficiency-2 values from the reference study, used by reconstruction tests."""

MODELS = ("gemma3", "mistral", "deepseek", "llama3.1")

STEPS = {
    "Base": (84.7, 97.1, 85.4, 79.7),
    "Base + Cprompt1": (78.3, 95.9, 99.0, 66.7),
    "Base + Cprompt2": (71.6, 91.1, 87.7, 74.5),
    "Base + Cprompt3": (69.3, 100.0, 90.28, 68.8),
    "Base + Cprompt4": (87.7, 94.5, 89.7, 65.4),
    "Improved Base": (76.2, 85.3, 92.8, 68.7),
    "Improved Base + Cprompt1": (74.5, 98.1, 89.0, 69.7),
    "Improved Base + Cprompt4": (65.5, 94.4, 96.5, 64.6),
    "Base + Cprompt4 + action one shot": (72.2, 102.75, 93.8, 66.3),
}

EFF2 = {
    "Base + Cprompt1": (0.07, 0.01, 0.13, 0.16),
    "Base + Cprompt2": (0.15, 0.06, 0.02, 0.06),
    "Base + Cprompt3": (0.18, 0.02, 0.05, 0.13),
    "Base + Cprompt4": (0.03, 0.02, 0.04, 0.17),
    "Improved Base": (0.10, 0.12, 0.08, 0.13),
    "Improved Base + Cprompt1": (0.12, 0.01, 0.04, 0.12),
    "Improved Base + Cprompt4": (0.22, 0.02, 0.11, 0.18),
    "Base + Cprompt4 + action one shot": (0.14, 0.05, 0.08, 0.16),
}
