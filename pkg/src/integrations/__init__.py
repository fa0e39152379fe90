# Result writers and input readers
