/* Prints every index of the smallest even value, highest index first,
   or NO EVENS when there is none. */
void SmallestEven(int values[], int n)
{
    int found = 0;
    int smallest = 0;
    for (int i = 0; i < n; i++) {
        if (values[i] % 2 == 0 && (!found || values[i] < smallest)) {
            smallest = values[i];
            found = 1;
        }
    }
    if (!found) {
        printf("NO EVENS\n");
        return;
    }
    int first = 1;
    for (int i = n - 1; i >= 0; i--) {
        if (values[i] == smallest) {
            printf(first ? "%d" : " %d", i);
            first = 0;
        }
    }
    printf("\n");
}
